#include <Eigen/Dense>

#include "llmag/linsolve.hpp"

namespace llmag {

namespace {
constexpr std::size_t kDenseLimit = 4096;

std::size_t linear(const GridSpec& g, int i, int j, int k) {
  return (static_cast<std::size_t>(k) * static_cast<std::size_t>(g.n[1]) + static_cast<std::size_t>(j)) *
             static_cast<std::size_t>(g.n[0]) +
         static_cast<std::size_t>(i);
}
}  // namespace

std::vector<double> assemble_neumann_laplacian(const GridSpec& g) {
  g.validate();
  const std::size_t n = g.cells();
  require(n <= kDenseLimit, "dense oracle: grid exceeds 4096 cells");
  std::vector<double> a(n * n, 0.0);
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i) {
        const std::size_t row = linear(g, i, j, k);
        const int idx[3] = {i, j, k};
        for (int ax = 0; ax < g.dim; ++ax) {
          const double w = 1.0 / (g.h[static_cast<std::size_t>(ax)] * g.h[static_cast<std::size_t>(ax)]);
          for (int dir : {-1, 1}) {
            int nb[3] = {idx[0], idx[1], idx[2]};
            nb[ax] += dir;
            // A ghost neighbour mirrors this cell and cancels its share of
            // the diagonal.
            if (nb[ax] < 0 || nb[ax] >= g.n[static_cast<std::size_t>(ax)]) continue;
            a[row * n + linear(g, nb[0], nb[1], nb[2])] += w;
            a[row * n + row] -= w;
          }
        }
      }
  return a;
}

VectorField3 dense_oracle_solve(const GridSpec& g, double lambda, const VectorField3& rhs) {
  require(rhs.grid() == g, "dense_oracle_solve: grid mismatch");
  const std::size_t n = g.cells();
  require(n <= kDenseLimit, "dense oracle: grid exceeds 4096 cells");
  const auto lap = assemble_neumann_laplacian(g);
  Eigen::MatrixXd a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c)
      a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = (r == c ? 1.0 : 0.0) - lambda * lap[r * n + c];
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);

  VectorField3 x(g);
  Eigen::VectorXd b(static_cast<Eigen::Index>(n));
  for (int c = 0; c < 3; ++c) {
    for (int k = 0; k < g.n[2]; ++k)
      for (int j = 0; j < g.n[1]; ++j)
        for (int i = 0; i < g.n[0]; ++i) b(static_cast<Eigen::Index>(linear(g, i, j, k))) = rhs(c, i, j, k);
    const Eigen::VectorXd sol = lu.solve(b);
    for (int k = 0; k < g.n[2]; ++k)
      for (int j = 0; j < g.n[1]; ++j)
        for (int i = 0; i < g.n[0]; ++i) x(c, i, j, k) = sol(static_cast<Eigen::Index>(linear(g, i, j, k)));
  }
  fill_ghosts(x);
  return x;
}

}  // namespace llmag
