#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <vector>

namespace driftlasso {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class BasisFamily { Cosine, OuLinear, Custom };

const char* to_string(BasisFamily family);

/// A vector field R^d -> R^d.
using VectorField = std::function<Vector(const Vector&)>;

/// The family {phi_0, ..., phi_p} defining b_theta = phi_0 + sum_j theta_j phi_j.
///
/// The design matrix Phi(x) is d x p with column j-1 holding phi_j(x); the
/// anchor phi_0(x) is kept separately because it carries no parameter.
class DriftBasis {
 public:
  /// phi_0(x) = 3 * s_anchor * x, phi_j(x) = cos((j+1) x) componentwise.
  static DriftBasis cosine(int d, int p, double s_anchor);

  /// p = d^2, theta = vec(A) (column stacking), b_theta(x) = A x, phi_0 = 0.
  static DriftBasis ou_linear(int d);

  /// `fields` holds phi_0..phi_p, `lipschitz` the declared L_0..L_p.
  static DriftBasis custom(int d, std::vector<VectorField> fields,
                           std::vector<double> lipschitz);

  /// Custom basis whose p+1 fields are identically zero.
  static DriftBasis zero(int d, int p);

  int dim() const noexcept { return d_; }
  int params() const noexcept { return p_; }
  BasisFamily family() const noexcept { return family_; }
  double s_anchor() const noexcept { return s_anchor_; }

  /// Declared Lipschitz constants L_0..L_p.
  const std::vector<double>& lipschitz() const noexcept { return lipschitz_; }

  /// Fills `design` (d x p) with Phi(x) and `anchor` (d) with phi_0(x).
  void evaluate(const Eigen::Ref<const Vector>& x, Eigen::Ref<Matrix> design,
                Eigen::Ref<Vector> anchor) const;

  Matrix design(const Vector& x) const;
  Vector anchor(const Vector& x) const;

  /// True when every phi_j (including phi_0) is identically zero.
  bool is_zero() const noexcept { return zero_; }

 private:
  DriftBasis() = default;

  int d_ = 0;
  int p_ = 0;
  BasisFamily family_ = BasisFamily::Custom;
  double s_anchor_ = 0.0;
  bool zero_ = false;
  std::vector<VectorField> fields_;
  std::vector<double> lipschitz_;
};

/// Parameter vector theta with an optional declared sparsity s.
class SparseParam {
 public:
  explicit SparseParam(Vector values, std::optional<int> declared_sparsity = {});

  const Vector& values() const noexcept { return values_; }
  std::optional<int> declared_sparsity() const noexcept { return declared_; }
  Eigen::Index size() const noexcept { return values_.size(); }

 private:
  Vector values_;
  std::optional<int> declared_;
};

/// Interaction matrix A of dX = -A X dt + dW.
class OUParam {
 public:
  explicit OUParam(Matrix a);
  const Matrix& matrix() const noexcept { return a_; }
  int dim() const noexcept { return static_cast<int>(a_.rows()); }

 private:
  Matrix a_;
};

/// Column-stacking index of entry (r, c) of a d x d matrix.
constexpr int ou_index(int r, int c, int d) noexcept { return r + c * d; }

Vector vec(const Matrix& a);
Matrix unvec(const Vector& theta, int d);

/// phi_0(x) + sum_j theta_j phi_j(x).
Vector eval_drift(const DriftBasis& basis, const SparseParam& theta, const Vector& x);

/// Indices of the s largest-magnitude entries; ties go to the lower index.
std::vector<int> largest_entries(const Vector& x, int s);

/// Membership in C(s, c) = { x != 0 : |x|_1 <= (1+c) |x restricted to I_s(x)|_1 }.
bool cone_membership(const Vector& x, int s, double c);

/// Number of entries with |theta_j| > tau.
int sparsity(const Vector& theta, double tau = 0.0);

}  // namespace driftlasso
