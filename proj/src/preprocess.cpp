#include "polarmig/preprocess.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <sstream>

#include "polarmig/parallel.hpp"

namespace polarmig {

std::string PreprocessReport::summary() const {
  std::ostringstream os;
  os.precision(6);
  double worst = 1, best = condition.empty() ? 1 : condition.front();
  for (double c : condition) {
    worst = std::max(worst, c);
    best = std::min(best, c);
  }
  os << "receivers " << condition.size() << "\n"
     << "cond(G~) min " << best << " max " << worst << "\n"
     << "threshold " << threshold << " truncation " << truncation << "\n"
     << "regularized pairs " << regularized << " receivers " << flagged.size() << "\n";
  return os.str();
}

CMat2d gtilde(const Vec3d& xr, const Vec3d& xs, const Vec3d& y0, Wavenumberd k) {
  return compress<double>(array_basis<double>(), dyadic_green<double>(xr, xs, k), source_basis<double>(xs, y0));
}

CMat2d inverse_adjoint(const CMat2d& A, double threshold, double truncation, bool* regularized) {
  const CMat2d Ah = A.adjoint();
  Eigen::JacobiSVD<CMat2d> svd(Ah, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto s = svd.singularValues();
  const bool reg = !(s(1) > 0) || s(0) / s(1) > threshold;
  if (regularized) *regularized = reg;
  if (!reg) return Ah.inverse();
  Eigen::Vector2d inv = Eigen::Vector2d::Zero();
  for (int i = 0; i < 2; ++i)
    if (s(i) >= truncation * s(0) && s(i) > 0) inv(i) = 1.0 / s(i);
  return svd.matrixV() * inv.cast<cd>().asDiagonal() * svd.matrixU().adjoint();
}

CMat2d source_coherency_inverse(const CMat2d& J) {
  const double c = cond2<double>(J);
  if (!(c < 1e12))
    throw NumericalError("source coherency is singular (cond " + std::to_string(c) +
                         "); a fully polarized source cannot be preprocessed");
  return J.inverse();
}

CMat2d preprocess_core(const CMat2d& Psi, const CMat2d& Gt, const CMat2d& J, const CMat2d& Gt_inv_adj,
                       const CMat2d& J_inv) {
  return (Psi - Gt * J * Gt.adjoint()) * Gt_inv_adj * J_inv;
}

CMat2d expected_error_core(const CMat2d& Pt, const CMat2d& Gt, const CMat2d& J, const CMat2d& Gt_inv_adj,
                           const CMat2d& J_inv) {
  return (Gt * J * Pt.adjoint() + Pt * J * Pt.adjoint()) * Gt_inv_adj * J_inv;
}

namespace {

struct Precomputed {
  std::vector<CMat2d> Gt, Ginv;
  std::vector<double> cond;
  std::vector<char> reg;
};

// G~ and its inverse adjoint at every (receiver, frequency).
Precomputed precompute(const ArrayDataSet& ds, double threshold, double truncation) {
  const std::size_t nr = ds.array().count();
  const int nf = ds.frequencies();
  Precomputed p;
  p.Gt.resize(nr * nf);
  p.Ginv.resize(nr * nf);
  p.cond.resize(nr * nf);
  p.reg.resize(nr * nf);
  const Vec3d xs = ds.source().position, y0 = ds.source().reference;
  const long total = long(nr * nf);
#pragma omp parallel for schedule(static) num_threads(threads())
  for (long idx = 0; idx < total; ++idx) {
    const std::size_t r = std::size_t(idx) / nf;
    const int f = int(std::size_t(idx) % nf);
    const CMat2d G = gtilde(ds.array().receiver(r), xs, y0, Wavenumberd(ds.band().wavenumber(f)));
    bool reg = false;
    p.Gt[idx] = G;
    p.Ginv[idx] = inverse_adjoint(G, threshold, truncation, &reg);
    p.cond[idx] = cond2<double>(G);
    p.reg[idx] = reg;
  }
  return p;
}

std::vector<CMat2d> source_inverses(const ArrayDataSet& ds) {
  std::vector<CMat2d> out;
  for (const auto& J : ds.source().coherency) out.push_back(source_coherency_inverse(J));
  return out;
}

}  // namespace

ArrayDataSet preprocess(const ArrayDataSet& ds, PreprocessReport* report) {
  if (ds.kind() != DataKind::coherency2x2) throw ValidationError("preprocess needs a coherency2x2 dataset");
  PreprocessReport rep;
  const auto Jinv = source_inverses(ds);
  const Precomputed pre = precompute(ds, rep.threshold, rep.truncation);
  const Basis32d Us = ds.source().basis();
  const Basis32d Up = array_basis<double>();
  ArrayDataSet out(DataKind::preprocessed3x3, ds.array(), ds.source(), ds.band());
  const std::size_t nr = ds.array().count();
  const int nf = ds.frequencies();
  const long total = long(nr * nf);
#pragma omp parallel for schedule(static) num_threads(threads())
  for (long idx = 0; idx < total; ++idx) {
    const std::size_t r = std::size_t(idx) / nf;
    const int f = int(std::size_t(idx) % nf);
    const CMat2d& J = ds.source().coherency_at(f);
    const CMat2d& Ji = Jinv.size() == 1 ? Jinv[0] : Jinv[f];
    const CMat2d M = preprocess_core(ds.mat2(r, f), pre.Gt[idx], J, pre.Ginv[idx], Ji);
    out.set(r, f, lift<double>(Up, M, Us));
  }
  rep.condition.assign(nr, 1.0);
  for (std::size_t r = 0; r < nr; ++r) {
    bool flagged = false;
    for (int f = 0; f < nf; ++f) {
      const std::size_t idx = r * nf + f;
      rep.condition[r] = std::max(rep.condition[r], pre.cond[idx]);
      if (pre.reg[idx]) {
        ++rep.regularized;
        flagged = true;
      }
    }
    if (flagged) rep.flagged.push_back(r);
  }
  if (report) *report = std::move(rep);
  return out;
}

ArrayDataSet expected_error(const ArrayDataSet& ds) {
  if (ds.kind() != DataKind::response3x3) throw ValidationError("expected_error needs a response3x3 dataset");
  PreprocessReport rep;
  const auto Jinv = source_inverses(ds);
  const Precomputed pre = precompute(ds, rep.threshold, rep.truncation);
  const Basis32d Us = ds.source().basis();
  const Basis32d Up = array_basis<double>();
  ArrayDataSet out(DataKind::preprocessed3x3, ds.array(), ds.source(), ds.band());
  const std::size_t nr = ds.array().count();
  const int nf = ds.frequencies();
  const long total = long(nr * nf);
#pragma omp parallel for schedule(static) num_threads(threads())
  for (long idx = 0; idx < total; ++idx) {
    const std::size_t r = std::size_t(idx) / nf;
    const int f = int(std::size_t(idx) % nf);
    const CMat2d& J = ds.source().coherency_at(f);
    const CMat2d& Ji = Jinv.size() == 1 ? Jinv[0] : Jinv[f];
    const CMat2d Pt = compress<double>(Up, ds.mat3(r, f), Us);
    out.set(r, f, lift<double>(Up, expected_error_core(Pt, pre.Gt[idx], J, pre.Ginv[idx], Ji), Us));
  }
  return out;
}

}  // namespace polarmig
