#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace escells {

/// Symmetric positive (semi)definite block-tridiagonal system
///
///   [ D_0   U_0                ]
///   [ U_0^T D_1   U_1          ]
///   [       ...   ...   ...    ]
///   [             U^T   D_{N-1}]
///
/// factored once by block Cholesky and solved many times.
///
/// When the matrix is singular along a single known direction whose last
/// block is `null_tail`, the final Schur complement is regularized along that
/// tail; consistent right-hand sides then get an exact solution.
class BlockTridiagonal {
 public:
  BlockTridiagonal(std::vector<Eigen::MatrixXd> diagonal, std::vector<Eigen::MatrixXd> upper,
                   std::optional<Eigen::VectorXd> null_tail = std::nullopt);

  int blocks() const { return static_cast<int>(schur_.size()); }
  int block_dim() const { return dim_; }

  /// Solves in place; rhs holds the stacked blocks.
  void solve_in_place(Eigen::Ref<Eigen::VectorXd> rhs) const;
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

 private:
  int dim_ = 0;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> schur_;
  std::vector<Eigen::MatrixXd> upper_;
  std::vector<Eigen::MatrixXd> gain_;  // S_i^{-1} U_i
};

}  // namespace escells
