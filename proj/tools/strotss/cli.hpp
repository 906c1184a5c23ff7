#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "strotss/guidance.hpp"
#include "strotss/ot_oracle.hpp"
#include "strotss/stylize.hpp"

// Argument handling for the `strotss` executable. Every numeric result comes
// from a library call; the functions here only translate between flags,
// files and library types.
namespace strotss::cli {

enum ExitCode : int { kOk = 0, kIoError = 1, kUsage = 2, kValidation = 3 };

struct WeightsSource {
  std::optional<std::filesystem::path> file;
  std::optional<std::uint64_t> random_seed;
};

struct JobConfig {
  std::filesystem::path content;
  std::filesystem::path style;
  std::filesystem::path out;
  StylizeConfig stylize;
  WeightsSource weights;
  std::optional<std::filesystem::path> content_mask;
  std::optional<std::filesystem::path> style_mask;
  std::optional<std::filesystem::path> points;
  double beta = kDefaultBeta;
  std::optional<std::filesystem::path> log;

  // Throws ValidationError when the combination of fields is inconsistent.
  void validate() const;
};

struct TightnessConfig {
  std::size_t pairs = 100;
  std::size_t n = 128;
  std::size_t dim = 32;
  std::uint64_t seed = 0;
  GroundMetric metric = GroundMetric::Cosine;
  bool identical = false;
  std::optional<std::filesystem::path> image_pairs;  // lines "a.png b.png"
  WeightsSource weights;
  std::size_t long_side = 256;
  std::size_t memory_budget_mb = 1024;
};

struct ParityConfig {
  std::filesystem::path weights;
  std::filesystem::path golden;
  std::filesystem::path image;
  double tolerance = 1e-3;
};

// Entry point shared by main() and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

int run_stylize(const JobConfig& job, std::ostream& out, std::ostream& err);
int run_tightness(const TightnessConfig& config, std::ostream& out, std::ostream& err);
int run_parity(const ParityConfig& config, std::ostream& out, std::ostream& err);

// Library-level steps behind the run_* functions; these throw.
WeightStore load_weight_source(const WeightsSource& source);
std::vector<PointPair> parse_points(std::istream& in);
GuidanceSpec parse_guidance(const std::optional<std::filesystem::path>& content_mask,
                            const std::optional<std::filesystem::path>& style_mask,
                            const std::optional<std::filesystem::path>& points,
                            Extent content, Extent style, double beta);
StylizeResult execute_stylize(const JobConfig& job, const LossCallback& on_record = {});
TightnessStudy execute_tightness(const TightnessConfig& config);

std::string loss_record_json(const LossRecord& record);
std::string tightness_json(const TightnessStudy& study);

// Maps a library exception to the process exit code.
int exit_code_for(const std::exception& error);

}  // namespace strotss::cli
