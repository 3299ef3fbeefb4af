#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "bcd/gradient.hpp"
#include "bcd/metrics.hpp"
#include "bcd/posterior.hpp"
#include "bcd/sampler.hpp"

namespace bcd {

/// Shortest round-trip decimal, capped at 17 significant digits.
std::string format_double(double v);

nlohmann::json scm_to_json(const GroundTruthScm& scm);
GroundTruthScm scm_from_json(const nlohmann::json& j);
void save_scm(const std::filesystem::path& path, const GroundTruthScm& scm);
GroundTruthScm load_scm(const std::filesystem::path& path);

/// Dataset directory layout: data.csv (x0..x{D-1}), labels.csv
/// (m0..m{d-1},v0..v{d-1}), latents.csv (z0..z{d-1}), manifest.json.
void save_dataset(const std::filesystem::path& dir, const Dataset& ds,
                  const nlohmann::json& manifest);
Dataset load_dataset(const std::filesystem::path& dir);
nlohmann::json load_dataset_manifest(const std::filesystem::path& dir);

/// Posterior checkpoint: everything needed to continue training bitwise from
/// `step` given the run seed (parameters, mask, fixed entries, Adam state).
nlohmann::json checkpoint_to_json(const PosteriorParams& params,
                                  const AdamState& adam, long step);
struct Checkpoint {
  PosteriorParams params;
  AdamState adam;
  long step = 0;
};
Checkpoint checkpoint_from_json(const nlohmann::json& j);
void save_checkpoint(const std::filesystem::path& path,
                     const PosteriorParams& params, const AdamState& adam,
                     long step);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// metrics.csv with header step,eshd,auroc,mse_L,kl_true_learned,mse_X.
void write_metrics_csv(const std::filesystem::path& path,
                       const std::vector<MetricsRecord>& records);
std::vector<MetricsRecord> read_metrics_csv(const std::filesystem::path& path);

}  // namespace bcd
