#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "kinodiff/denoiser/denoiser.hpp"
#include "kinodiff/geodata/canonical.hpp"
#include "kinodiff/numerics/adam.hpp"

namespace kinodiff::denoiser {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct ScheduleInfo {
  std::size_t steps = 0;
  double beta_start = 0.0;
  double beta_end = 0.0;
  std::string digest;

  friend bool operator==(const ScheduleInfo&, const ScheduleInfo&) = default;
};

struct Checkpoint {
  DenoiserParams params;
  std::shared_ptr<const geodata::Normalizer> normalizer;
  ScheduleInfo schedule;
  std::uint64_t step = 0;
  std::optional<numerics::OptimState> optimizer;
  /// Free-form run configuration text saved for provenance.
  std::string run_config;
};

/// Binary layout: magic "KDIFFCKP", u32 version, u64 header length, JSON
/// header (model config, normalizer, schedule, step, optimizer config),
/// u32 blob count, then per blob: u32 name length, name, u32 rank, u64 dims,
/// fp64 values. All integers and floats little-endian.
void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
/// Throws InputError on a malformed file and ShapeError when the stored
/// tensors do not match the stored configuration.
Checkpoint load_checkpoint(const std::string& path);

std::string serialize_checkpoint(const Checkpoint& checkpoint);
Checkpoint deserialize_checkpoint(const std::string& bytes);

}  // namespace kinodiff::denoiser
