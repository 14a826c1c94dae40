#include "driftlasso/model.hpp"

#include "driftlasso/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace driftlasso {

const char* to_string(BasisFamily family) {
  switch (family) {
    case BasisFamily::Cosine:
      return "cosine";
    case BasisFamily::OuLinear:
      return "ou-linear";
    case BasisFamily::Custom:
      return "custom";
  }
  return "unknown";
}

DriftBasis DriftBasis::cosine(int d, int p, double s_anchor) {
  if (d < 1 || p < 1) throw InvalidInput("cosine basis needs d >= 1 and p >= 1");
  if (!(s_anchor > 0.0) || !std::isfinite(s_anchor))
    throw InvalidInput("cosine basis needs a positive s_anchor");
  DriftBasis b;
  b.d_ = d;
  b.p_ = p;
  b.family_ = BasisFamily::Cosine;
  b.s_anchor_ = s_anchor;
  b.lipschitz_.resize(static_cast<std::size_t>(p) + 1);
  b.lipschitz_[0] = 3.0 * s_anchor;
  for (int j = 1; j <= p; ++j) b.lipschitz_[static_cast<std::size_t>(j)] = j + 1.0;
  return b;
}

DriftBasis DriftBasis::ou_linear(int d) {
  if (d < 1) throw InvalidInput("ou-linear basis needs d >= 1");
  DriftBasis b;
  b.d_ = d;
  b.p_ = d * d;
  b.family_ = BasisFamily::OuLinear;
  b.lipschitz_.assign(static_cast<std::size_t>(b.p_) + 1, 1.0);
  b.lipschitz_[0] = 0.0;
  return b;
}

DriftBasis DriftBasis::custom(int d, std::vector<VectorField> fields,
                              std::vector<double> lipschitz) {
  if (d < 1) throw InvalidInput("custom basis needs d >= 1");
  if (fields.size() < 2) throw InvalidInput("custom basis needs phi_0 and at least one phi_j");
  if (lipschitz.size() != fields.size())
    throw InvalidInput("custom basis must declare one Lipschitz constant per field");
  for (double l : lipschitz)
    if (!(l >= 0.0) || !std::isfinite(l))
      throw InvalidInput("Lipschitz constants must be finite and nonnegative");
  for (const auto& f : fields)
    if (!f) throw InvalidInput("custom basis field is empty");
  DriftBasis b;
  b.d_ = d;
  b.p_ = static_cast<int>(fields.size()) - 1;
  b.family_ = BasisFamily::Custom;
  b.fields_ = std::move(fields);
  b.lipschitz_ = std::move(lipschitz);
  return b;
}

DriftBasis DriftBasis::zero(int d, int p) {
  if (p < 1) throw InvalidInput("zero basis needs p >= 1");
  std::vector<VectorField> fields(static_cast<std::size_t>(p) + 1,
                                  [d](const Vector&) { return Vector::Zero(d); });
  DriftBasis b = custom(d, std::move(fields), std::vector<double>(static_cast<std::size_t>(p) + 1, 0.0));
  b.zero_ = true;
  return b;
}

void DriftBasis::evaluate(const Eigen::Ref<const Vector>& x, Eigen::Ref<Matrix> design,
                          Eigen::Ref<Vector> anchor) const {
  if (x.size() != d_) throw InvalidInput("state has length " + std::to_string(x.size()) +
                                         ", basis expects " + std::to_string(d_));
  switch (family_) {
    case BasisFamily::Cosine:
      anchor = (3.0 * s_anchor_) * x;
      for (int j = 1; j <= p_; ++j) design.col(j - 1) = ((j + 1.0) * x.array()).cos().matrix();
      break;
    case BasisFamily::OuLinear:
      anchor.setZero();
      design.setZero();
      for (int c = 0; c < d_; ++c)
        for (int r = 0; r < d_; ++r) design(r, ou_index(r, c, d_)) = x(c);
      break;
    case BasisFamily::Custom: {
      if (zero_) {
        anchor.setZero();
        design.setZero();
        break;
      }
      const Vector xv = x;
      anchor = fields_[0](xv);
      for (int j = 1; j <= p_; ++j) {
        Vector v = fields_[static_cast<std::size_t>(j)](xv);
        if (v.size() != d_) throw InvalidInput("custom field returned wrong dimension");
        design.col(j - 1) = v;
      }
      break;
    }
  }
}

Matrix DriftBasis::design(const Vector& x) const {
  Matrix m(d_, p_);
  Vector a(d_);
  evaluate(x, m, a);
  return m;
}

Vector DriftBasis::anchor(const Vector& x) const {
  Matrix m(d_, p_);
  Vector a(d_);
  evaluate(x, m, a);
  return a;
}

SparseParam::SparseParam(Vector values, std::optional<int> declared_sparsity)
    : values_(std::move(values)), declared_(declared_sparsity) {
  if (!values_.allFinite()) throw InvalidInput("parameter has non-finite entries");
  if (declared_ && sparsity(values_) != *declared_)
    throw InvalidInput("parameter has " + std::to_string(sparsity(values_)) +
                       " nonzeros but declares s = " + std::to_string(*declared_));
}

OUParam::OUParam(Matrix a) : a_(std::move(a)) {
  if (a_.rows() != a_.cols() || a_.rows() == 0) throw InvalidInput("interaction matrix must be square");
  if (!a_.allFinite()) throw InvalidInput("interaction matrix has non-finite entries");
}

Vector vec(const Matrix& a) { return Eigen::Map<const Vector>(a.data(), a.size()); }

Matrix unvec(const Vector& theta, int d) {
  if (theta.size() != static_cast<Eigen::Index>(d) * d)
    throw InvalidInput("vector length is not d^2");
  return Eigen::Map<const Matrix>(theta.data(), d, d);
}

Vector eval_drift(const DriftBasis& basis, const SparseParam& theta, const Vector& x) {
  if (theta.size() != basis.params())
    throw InvalidInput("theta has length " + std::to_string(theta.size()) + ", basis has p = " +
                       std::to_string(basis.params()));
  if (x.size() != basis.dim()) throw InvalidInput("x has wrong dimension");
  Matrix design(basis.dim(), basis.params());
  Vector out(basis.dim());
  basis.evaluate(x, design, out);
  out.noalias() += design * theta.values();
  return out;
}

std::vector<int> largest_entries(const Vector& x, int s) {
  std::vector<int> idx(static_cast<std::size_t>(x.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return std::abs(x(a)) > std::abs(x(b)); });
  idx.resize(static_cast<std::size_t>(std::min<Eigen::Index>(s, x.size())));
  return idx;
}

bool cone_membership(const Vector& x, int s, double c) {
  if (s < 1) throw InvalidInput("cone needs s >= 1");
  if (!(c > 0.0)) throw InvalidInput("cone needs c > 0");
  const double total = x.lpNorm<1>();
  if (!(total > 0.0)) throw InvalidInput("the cone excludes the zero vector");
  double head = 0.0;
  for (int i : largest_entries(x, s)) head += std::abs(x(i));
  return total <= (1.0 + c) * head;
}

int sparsity(const Vector& theta, double tau) {
  if (tau < 0.0) throw InvalidInput("threshold must be nonnegative");
  return static_cast<int>((theta.array().abs() > tau).count());
}

}  // namespace driftlasso
