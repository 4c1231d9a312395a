#include "escells/block_tridiagonal.hpp"

#include <stdexcept>
#include <string>

namespace escells {

BlockTridiagonal::BlockTridiagonal(std::vector<Eigen::MatrixXd> diagonal,
                                   std::vector<Eigen::MatrixXd> upper,
                                   std::optional<Eigen::VectorXd> null_tail)
    : upper_(std::move(upper)) {
  const std::size_t N = diagonal.size();
  if (N == 0) throw std::invalid_argument("BlockTridiagonal: no blocks");
  if (upper_.size() + 1 != N) throw std::invalid_argument("BlockTridiagonal: need N-1 upper blocks");
  dim_ = static_cast<int>(diagonal[0].rows());
  schur_.reserve(N);
  gain_.reserve(N - 1);
  Eigen::MatrixXd S = diagonal[0];
  for (std::size_t i = 0; i < N; ++i) {
    if (i > 0) S = diagonal[i] - upper_[i - 1].transpose() * gain_[i - 1];
    if (i + 1 == N && null_tail) {
      const Eigen::VectorXd u = null_tail->normalized();
      const double scale = S.trace() / static_cast<double>(dim_);
      S += scale * u * u.transpose();
    }
    schur_.emplace_back(S);
    if (schur_.back().info() != Eigen::Success)
      throw std::runtime_error("BlockTridiagonal: block " + std::to_string(i) +
                               " is not positive definite");
    if (i + 1 < N) gain_.push_back(schur_.back().solve(upper_[i]));
  }
}

void BlockTridiagonal::solve_in_place(Eigen::Ref<Eigen::VectorXd> x) const {
  const int N = blocks();
  const int n = dim_;
  if (x.size() != static_cast<Eigen::Index>(N) * n)
    throw std::invalid_argument("BlockTridiagonal: rhs size mismatch");
  // Forward: y_i = r_i - U_{i-1}^T S_{i-1}^{-1} y_{i-1}
  for (int i = 1; i < N; ++i)
    x.segment(i * n, n).noalias() -= gain_[i - 1].transpose() * x.segment((i - 1) * n, n);
  // Back: x_i = S_i^{-1} y_i - S_i^{-1} U_i x_{i+1}
  x.segment((N - 1) * n, n) = schur_[N - 1].solve(x.segment((N - 1) * n, n));
  for (int i = N - 2; i >= 0; --i) {
    Eigen::VectorXd yi = schur_[i].solve(x.segment(i * n, n));
    yi.noalias() -= gain_[i] * x.segment((i + 1) * n, n);
    x.segment(i * n, n) = yi;
  }
}

Eigen::VectorXd BlockTridiagonal::solve(const Eigen::VectorXd& rhs) const {
  Eigen::VectorXd x = rhs;
  solve_in_place(x);
  return x;
}

}  // namespace escells
