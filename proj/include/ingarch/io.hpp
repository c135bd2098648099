#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "ingarch/coupling.hpp"
#include "ingarch/estimate.hpp"
#include "ingarch/mc.hpp"
#include "ingarch/model.hpp"

namespace ingarch {

// Series CSV: header `t,x,v`, volatilities with 12 significant digits.
void write_series_csv(std::ostream& os, std::span<const SeriesRecord> series);
std::vector<SeriesRecord> read_series_csv(std::istream& is);

// Fit CSV: `p,omega_hat,alpha_1..alpha_p,se_omega,se_1..se_p,eta_sq,constrained`.
void write_fit_csv(std::ostream& os, const FitResult& fit);

// Mixing CSV: `n,analytic,emp_disagree,emp_disagree_se,emp_uncoupled,emp_uncoupled_se`.
void write_mixing_csv(std::ostream& os, const MixingReport& report);

// Study CSV, Table-style: `p,T,omega_mean,omega_se,alpha1_mean,alpha1_se,...,success_rate`
// with columns up to the largest order; shorter rows leave cells empty.
void write_study_csv(std::ostream& os, const StudyResult& result);

} // namespace ingarch
