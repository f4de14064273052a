#pragma once

#include "polarmig/dataset.hpp"

namespace polarmig {

struct PreprocessReport {
  std::vector<double> condition;     // worst cond(G~) over the band, per receiver
  std::vector<std::size_t> flagged;  // receivers where the truncated inverse engaged
  std::size_t regularized = 0;       // (receiver, frequency) pairs regularized
  double threshold = 1e8;            // cond above which G~* is pseudo-inverted
  double truncation = 1e-8;          // relative singular-value cutoff

  std::string summary() const;
};

// U_par^T G(x_r, x_s) U_s in the array and source bases.
CMat2d gtilde(const Vec3d& xr, const Vec3d& xs, const Vec3d& y0, Wavenumberd k);

// Inverse of A*, or its truncated pseudo-inverse when cond(A) exceeds the threshold.
CMat2d inverse_adjoint(const CMat2d& A, double threshold, double truncation, bool* regularized = nullptr);

// Checked inverse of the source coherency; throws NumericalError when cond >= 1e12.
CMat2d source_coherency_inverse(const CMat2d& J);

// 2x2 core M of p(Psi) = U_par M U_s^T.
CMat2d preprocess_core(const CMat2d& Psi, const CMat2d& Gt, const CMat2d& J, const CMat2d& Gt_inv_adj,
                       const CMat2d& J_inv);
// 2x2 core of the error q.
CMat2d expected_error_core(const CMat2d& Pt, const CMat2d& Gt, const CMat2d& J, const CMat2d& Gt_inv_adj,
                           const CMat2d& J_inv);

ArrayDataSet preprocess(const ArrayDataSet& coherency, PreprocessReport* report = nullptr);

// q field for a full response dataset (kind response3x3).
ArrayDataSet expected_error(const ArrayDataSet& response);

}  // namespace polarmig
