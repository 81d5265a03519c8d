// Serialization of skeletons and sample matrices.
//
// Skeleton CSV schema: header `time,x_1..x_d,v_1..v_d`, one row per event,
// 17 significant digits so round-trips are bit-exact. Thinning statistics go
// to a JSON sidecar {proposals, acceptances, clock_draws,
// gradient_evaluations}.

#pragma once

#include <string>
#include <vector>

#include "pdmp/core.hpp"
#include "pdmp/targets.hpp"

namespace pdmp {

void write_skeleton_csv(const Skeleton& skeleton, const std::string& path);
Skeleton read_skeleton_csv(const std::string& path);

void write_stats_json(const ThinningStats& stats, const std::string& path);

// Samples as CSV with header `x_1..x_d`.
void write_samples_csv(const std::vector<std::vector<double>>& samples, const std::string& path);
std::vector<std::vector<double>> read_samples_csv(const std::string& path);

std::string format_full_precision(double v);

// Multinomial dataset as JSON {p, prior, counts, batches}; p (the
// generating probabilities) is optional metadata and may be empty.
void write_dirichlet_dataset_json(const DirichletPosterior& posterior,
                                  const std::vector<double>& p, const std::string& path);
DirichletPosterior read_dirichlet_dataset_json(const std::string& path,
                                               std::vector<double>* p_out = nullptr);

} // namespace pdmp
