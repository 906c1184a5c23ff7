#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "strotss/feature_net.hpp"
#include "strotss/image_io.hpp"

namespace strotss::cli {
namespace {

using nlohmann::ordered_json;

std::optional<std::filesystem::path> optional_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::filesystem::path(s);
}

void check_output_dir(const std::filesystem::path& path) {
  const auto parent = path.parent_path();
  if (!parent.empty() && !std::filesystem::is_directory(parent)) {
    throw IoError("output directory does not exist: " + parent.string());
  }
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

}  // namespace

void JobConfig::validate() const {
  if (weights.file.has_value() == weights.random_seed.has_value()) {
    throw ValidationError("exactly one of --weights and --random-weights is required");
  }
  if (content_mask.has_value() != style_mask.has_value()) {
    throw ValidationError("--content-mask and --style-mask must be given together");
  }
  if (content_mask && points) {
    throw ValidationError("region masks and a points file cannot be combined");
  }
  if (!(beta > 0.0)) throw ValidationError("--beta must be positive");
  try {
    stylize.validate();
  } catch (const PreconditionError& e) {
    throw ValidationError(e.what());
  }
}

int exit_code_for(const std::exception& error) {
  if (dynamic_cast<const ValidationError*>(&error) || dynamic_cast<const SpecError*>(&error) ||
      dynamic_cast<const PreconditionError*>(&error) ||
      dynamic_cast<const ShapeError*>(&error)) {
    return kValidation;
  }
  return kIoError;
}

WeightStore load_weight_source(const WeightsSource& source) {
  if (source.file.has_value() == source.random_seed.has_value()) {
    throw ValidationError("exactly one weights source is required");
  }
  if (source.file) return load_weights(*source.file);
  return random_weights(*source.random_seed);
}

std::vector<PointPair> parse_points(std::istream& in) {
  std::vector<PointPair> out;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::vector<std::string> tokens;
    for (std::string t; fields >> t;) tokens.push_back(t);
    if (tokens.empty()) continue;
    double v[4];
    bool ok = tokens.size() == 4;
    for (std::size_t k = 0; ok && k < 4; ++k) {
      std::size_t used = 0;
      try {
        v[k] = std::stod(tokens[k], &used);
      } catch (const std::exception&) {
        ok = false;
      }
      ok = ok && used == tokens[k].size() && std::isfinite(v[k]);
    }
    if (!ok) {
      throw ParseError("points line " + std::to_string(lineno) +
                       ": expected four numbers 'cx cy sx sy', got '" + line + "'");
    }
    out.push_back({Coord{v[1], v[0]}, Coord{v[3], v[2]}});
  }
  return out;
}

GuidanceSpec parse_guidance(const std::optional<std::filesystem::path>& content_mask,
                            const std::optional<std::filesystem::path>& style_mask,
                            const std::optional<std::filesystem::path>& points,
                            Extent content, Extent style, double beta) {
  if (content_mask.has_value() != style_mask.has_value()) {
    throw ValidationError("region guidance needs both a content and a style mask");
  }
  if (content_mask && points) {
    throw ValidationError("region masks and a points file cannot be combined");
  }
  if (content_mask) {
    const GrayImage cm = load_gray_png(*content_mask);
    const GrayImage sm = load_gray_png(*style_mask);
    auto check = [](const GrayImage& m, Extent e, const std::filesystem::path& p) {
      if (!(m.extent == e)) {
        throw ValidationError(p.string() + ": mask is " + std::to_string(m.extent.height) +
                              "x" + std::to_string(m.extent.width) + " but the image is " +
                              std::to_string(e.height) + "x" + std::to_string(e.width));
      }
    };
    check(cm, content, *content_mask);
    check(sm, style, *style_mask);
    return region_guidance(cm.pixels, content, sm.pixels, style, beta);
  }
  if (points) {
    std::ifstream in(*points);
    if (!in) throw IoError("cannot open " + points->string());
    const std::vector<PointPair> pairs = parse_points(in);
    auto inside = [](Coord c, Extent e) {
      return c.y >= 0 && c.x >= 0 && c.y <= static_cast<double>(e.height) - 1 &&
             c.x <= static_cast<double>(e.width) - 1;
    };
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      if (!inside(pairs[k].content, content) || !inside(pairs[k].style, style)) {
        throw ValidationError(points->string() + ": point pair " + std::to_string(k + 1) +
                              " lies outside its image");
      }
    }
    return augment_point_constraints(pairs, content, style, beta);
  }
  GuidanceSpec empty;
  empty.output_frame = content;
  empty.style_frame = style;
  empty.beta = beta;
  return empty;
}

StylizeResult execute_stylize(const JobConfig& job, const LossCallback& on_record) {
  job.validate();
  const WeightStore weights = load_weight_source(job.weights);
  const Tensor content = load_image(job.content);
  const Tensor style = load_image(job.style);
  const GuidanceSpec guidance =
      parse_guidance(job.content_mask, job.style_mask, job.points,
                     {content.dim(1), content.dim(2)}, {style.dim(1), style.dim(2)}, job.beta);
  return stylize(content, style, weights, job.stylize, guidance.empty() ? nullptr : &guidance,
                 on_record);
}

std::string loss_record_json(const LossRecord& r) {
  ordered_json j;
  j["scale"] = r.scale;
  j["iter"] = r.iter;
  j["lc"] = r.lc;
  j["lm"] = r.lm;
  j["lr"] = r.lr;
  j["lp"] = r.lp;
  j["total"] = r.total;
  j["alpha"] = r.alpha;
  j["learning_rate"] = r.learning_rate;
  j["long_side"] = r.long_side;
  j["height"] = r.extent.height;
  j["width"] = r.extent.width;
  if (r.dropped_constraints) j["dropped_constraints"] = r.dropped_constraints;
  return j.dump();
}

int run_stylize(const JobConfig& job, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    job.validate();
    check_output_dir(job.out);
    std::ofstream log;
    if (job.log) {
      check_output_dir(*job.log);
      log.open(*job.log);
      if (!log) throw IoError("cannot write " + job.log->string());
    }
    std::size_t warned_scale = 0;
    const StylizeResult result = execute_stylize(job, [&](const LossRecord& r) {
      if (log.is_open()) log << loss_record_json(r) << '\n';
      if (r.dropped_constraints && warned_scale != r.scale) {
        warned_scale = r.scale;
        err << "warning: " << r.dropped_constraints
            << " guidance constraint(s) matched no samples at scale " << r.scale
            << " and were dropped\n";
      }
    });
    if (log.is_open()) {
      log.flush();
      if (!log) throw IoError("write failed for " + job.log->string());
    }
    save_png(job.out, result.image);
    out << "wrote " << job.out.string() << '\n';
    return static_cast<int>(kOk);
  });
}

TightnessStudy execute_tightness(const TightnessConfig& config) {
  if (config.pairs == 0) throw ValidationError("--pairs must be at least 1");
  if (config.n == 0) throw ValidationError("--n must be at least 1");
  if (config.dim == 0) throw ValidationError("--dim must be at least 1");
  const std::size_t budget = config.memory_budget_mb << 20;
  if (!config.image_pairs) {
    check_tightness_budget(config.n, config.dim, budget);
    return remd_tightness_study(
        random_feature_pairs(config.pairs, config.n, config.dim, config.seed, config.identical),
        config.metric);
  }
  const NetworkSpec spec = NetworkSpec::vgg16();
  check_tightness_budget(config.n, spec.hypercolumn_dim(), budget);
  const WeightStore weights = load_weight_source(config.weights);
  std::ifstream list(*config.image_pairs);
  if (!list) throw IoError("cannot open " + config.image_pairs->string());
  const auto base = config.image_pairs->parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() ? base / path : path;
  };
  auto prepare = [&](const std::filesystem::path& p) {
    const Tensor img = load_image(p);
    const Extent e = scaled_extent({img.dim(1), img.dim(2)}, config.long_side);
    if (e.area() < config.n) {
      throw ValidationError(p.string() + ": too few pixels for n = " + std::to_string(config.n));
    }
    return resize_image(img, e);
  };
  Rng rng(config.seed);
  std::vector<FeaturePair> pairs;
  std::string line;
  for (std::size_t lineno = 1; std::getline(list, line); ++lineno) {
    std::istringstream fields(line);
    std::string a, b, extra;
    if (!(fields >> a)) continue;
    if (!(fields >> b) || (fields >> extra)) {
      throw ParseError(config.image_pairs->string() + " line " + std::to_string(lineno) +
                       ": expected two image paths");
    }
    pairs.push_back(image_feature_pair(prepare(resolve(a)), prepare(resolve(b)), weights,
                                       config.n, rng, spec));
    if (pairs.size() == config.pairs) break;
  }
  if (pairs.empty()) throw ValidationError("image pair list is empty");
  return remd_tightness_study(pairs, config.metric);
}

std::string tightness_json(const TightnessStudy& study) {
  ordered_json j;
  j["count"] = study.count;
  j["mean"] = study.mean;
  j["std"] = study.stddev;
  return j.dump();
}

int run_tightness(const TightnessConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    out << tightness_json(execute_tightness(config)) << '\n';
    return static_cast<int>(kOk);
  });
}

int run_parity(const ParityConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const NetworkSpec spec = NetworkSpec::vgg16();
    const WeightStore weights = load_weights(config.weights);
    const std::vector<Tensor> golden = load_activations(config.golden, spec);
    const Tensor image = load_image(config.image);
    const auto acts = extract_activations(image, weights, spec);
    ordered_json report;
    report["layers"] = ordered_json::array();
    double worst = 0.0;
    for (std::size_t i = 0; i < acts.size(); ++i) {
      if (acts[i]->shape() != golden[i].shape()) {
        throw SpecError(activation_entry_name(spec.keep_set()[i]) + " has shape " +
                        shape_string(golden[i].shape()) + ", engine produced " +
                        shape_string(acts[i]->shape()));
      }
      const double d = max_abs_diff(*acts[i], golden[i]);
      worst = std::max(worst, d);
      report["layers"].push_back(
          {{"name", activation_entry_name(spec.keep_set()[i])}, {"max_abs", d}});
    }
    const bool pass = worst <= config.tolerance;
    report["max_abs"] = worst;
    report["tolerance"] = config.tolerance;
    report["pass"] = pass;
    out << report.dump() << '\n';
    return static_cast<int>(pass ? kOk : kValidation);
  });
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Style transfer by relaxed optimal transport and self-similarity", "strotss"};
  app.require_subcommand(1);

  JobConfig job;
  std::string content, style, output, weights_path, content_mask, style_mask, points, log;
  std::string style_loss = "full", metric = "cosine", optimize = "pyramid";
  std::optional<std::uint64_t> random_weights_seed;
  auto* st = app.add_subcommand("stylize", "Stylize a content image");
  st->add_option("--content", content, "Content image (PNG or JPEG)")->required();
  st->add_option("--style", style, "Style image (PNG or JPEG)")->required();
  st->add_option("--out", output, "Output PNG")->required();
  st->add_option("--alpha", job.stylize.alpha_base, "Content weight before halving")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  st->add_option("--scales", job.stylize.scale_count, "Number of scales")
      ->check(CLI::Range(1, 8))
      ->capture_default_str();
  st->add_option("--iters,--iterations", job.stylize.iterations, "RMSprop steps per scale")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  st->add_option("--seed", job.stylize.seed, "Sampling seed")->capture_default_str();
  auto* w = st->add_option("--weights", weights_path, "STWT weight file");
  auto* rw = st->add_option("--random-weights", random_weights_seed,
                            "Use seeded random weights instead of a file");
  w->excludes(rw);
  st->add_option("--style-loss", style_loss, "Style loss terms")
      ->check(CLI::IsMember({"full", "remd", "moment", "ra", "rb", "remd-moment"}))
      ->capture_default_str();
  st->add_option("--ground-metric", metric, "Ground metric for the transport term")
      ->check(CLI::IsMember({"cosine", "l2"}))
      ->capture_default_str();
  st->add_option("--optimize", optimize, "Optimization variables")
      ->check(CLI::IsMember({"pyramid", "pixels"}))
      ->capture_default_str();
  st->add_flag("--single-scale", job.stylize.single_scale,
               "Run all iterations at the final resolution");
  auto* cm = st->add_option("--content-mask", content_mask, "Content region mask PNG");
  auto* sm = st->add_option("--style-mask", style_mask, "Style region mask PNG");
  auto* pts = st->add_option("--points", points, "Point correspondences file");
  cm->needs(sm);
  sm->needs(cm);
  pts->excludes(cm);
  pts->excludes(sm);
  st->add_option("--beta", job.beta, "Guidance weight")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  st->add_option("--log", log, "JSON-lines loss log");

  TightnessConfig tight;
  std::string tight_metric = "cosine", pair_list, tight_weights;
  std::optional<std::uint64_t> tight_random;
  auto* tt = app.add_subcommand("tightness", "Compare relaxed and exact EMD");
  tt->add_option("--pairs", tight.pairs, "Number of feature-set pairs")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  tt->add_option("--n", tight.n, "Features per set")->check(CLI::PositiveNumber)->capture_default_str();
  tt->add_option("--dim", tight.dim, "Random feature dimension")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  tt->add_option("--seed", tight.seed, "Random seed")->capture_default_str();
  tt->add_option("--metric", tight_metric, "Ground metric")
      ->check(CLI::IsMember({"cosine", "l2"}))
      ->capture_default_str();
  tt->add_flag("--identical", tight.identical, "Use B = A for every pair");
  tt->add_option("--image-pairs", pair_list, "File listing image pairs, one per line");
  auto* tw = tt->add_option("--weights", tight_weights, "STWT weight file");
  auto* trw = tt->add_option("--random-weights", tight_random, "Seeded random weights");
  tw->excludes(trw);
  tt->add_option("--long-side", tight.long_side, "Resize images to this long side")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  tt->add_option("--memory-budget-mb", tight.memory_budget_mb, "Working-set limit")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  ParityConfig parity;
  std::string parity_weights, golden, parity_image;
  auto* pt = app.add_subcommand("parity", "Compare activations with a reference file");
  pt->add_option("--weights", parity_weights, "STWT weight file")->required();
  pt->add_option("--golden", golden, "Reference activation file")->required();
  pt->add_option("--image", parity_image, "Test image")->required();
  pt->add_option("--tolerance", parity.tolerance, "Max-abs tolerance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? static_cast<int>(kOk) : static_cast<int>(kUsage);
  }

  if (st->parsed()) {
    if (weights_path.empty() && !random_weights_seed) {
      err << "error: one of --weights or --random-weights is required\n";
      return kUsage;
    }
    job.content = content;
    job.style = style;
    job.out = output;
    job.weights.file = optional_path(weights_path);
    job.weights.random_seed = random_weights_seed;
    job.stylize.style_loss = *parse_style_loss_mode(style_loss);
    job.stylize.ground_metric = *parse_ground_metric(metric);
    job.stylize.optimize = *parse_optimize_mode(optimize);
    job.content_mask = optional_path(content_mask);
    job.style_mask = optional_path(style_mask);
    job.points = optional_path(points);
    job.log = optional_path(log);
    return run_stylize(job, out, err);
  }
  if (tt->parsed()) {
    tight.metric = *parse_ground_metric(tight_metric);
    tight.image_pairs = optional_path(pair_list);
    tight.weights.file = optional_path(tight_weights);
    tight.weights.random_seed = tight_random;
    if (tight.image_pairs && tight_weights.empty() && !tight_random) {
      err << "error: --image-pairs needs --weights or --random-weights\n";
      return kUsage;
    }
    return run_tightness(tight, out, err);
  }
  parity.weights = parity_weights;
  parity.golden = golden;
  parity.image = parity_image;
  return run_parity(parity, out, err);
}

}  // namespace strotss::cli
