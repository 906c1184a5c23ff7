#include <gtest/gtest.h>

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "cli.hpp"
#include "oracles.hpp"
#include "strotss/feature_net.hpp"
#include "strotss/image_io.hpp"
#include "strotss/stwt.hpp"
#include "temp_dir.hpp"

namespace strotss {
namespace {

const std::filesystem::path kAssets = STROTSS_ASSETS_DIR;
const std::string kContent = (kAssets / "toy_content.png").string();
const std::string kStyle = (kAssets / "toy_style.png").string();

struct CliRun {
  int code;
  std::string out, err;
};

CliRun run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "strotss");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> stylize_args(const std::filesystem::path& out,
                                      std::vector<std::string> extra = {}) {
  std::vector<std::string> a{"stylize", "--content", kContent, "--style", kStyle,
                             "--out", out.string(), "--random-weights", "7"};
  a.insert(a.end(), extra.begin(), extra.end());
  return a;
}

void save_mask(const std::filesystem::path& p, Extent e, auto label) {
  GrayImage g{e, std::vector<std::uint8_t>(e.area())};
  for (std::size_t y = 0; y < e.height; ++y)
    for (std::size_t x = 0; x < e.width; ++x)
      g.pixels[y * e.width + x] = static_cast<std::uint8_t>(label(y, x));
  save_gray_png(p, g);
}

// Usage and exit codes

TEST(CliUsage, NoSubcommandIsUsageError) {
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
}

TEST(CliUsage, HelpExitsZero) {
  const CliRun r = run_cli({"stylize", "--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("--content"), std::string::npos);
}

TEST(CliUsage, BadFlagsAreUsageErrors) {
  testing::TempDir dir;
  EXPECT_EQ(run_cli(stylize_args(dir / "o.png", {"--bogus"})).code, 2);
  EXPECT_EQ(run_cli(stylize_args(dir / "o.png", {"--style-loss", "nope"})).code, 2);
  EXPECT_EQ(run_cli(stylize_args(dir / "o.png", {"--ground-metric", "l1"})).code, 2);
  EXPECT_EQ(run_cli(stylize_args(dir / "o.png", {"--alpha", "-1"})).code, 2);
  EXPECT_EQ(run_cli(stylize_args(dir / "o.png", {"--scales", "0"})).code, 2);
  EXPECT_EQ(run_cli({"stylize", "--content", kContent, "--style", kStyle}).code, 2);
  EXPECT_EQ(run_cli({"stylize", "--content", kContent, "--style", kStyle, "--out",
                     (dir / "o.png").string()})
                .code,
            2);
  EXPECT_EQ(run_cli(stylize_args(dir / "o.png", {"--weights", "w.stwt"})).code, 2);
  EXPECT_EQ(run_cli(stylize_args(dir / "o.png", {"--content-mask", "a.png"})).code, 2);
  EXPECT_FALSE(std::filesystem::exists(dir / "o.png"));
}

TEST(CliUsage, MissingContentFileIsIoErrorNamingPath) {
  testing::TempDir dir;
  const std::string missing = (dir / "nope" / "content.png").string();
  const CliRun r = run_cli({"stylize", "--content", missing, "--style", kStyle, "--out",
                         (dir / "o.png").string(), "--random-weights", "1", "--iters", "0"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find(missing), std::string::npos) << r.err;
}

TEST(CliUsage, MissingOutputDirectoryIsIoError) {
  testing::TempDir dir;
  const CliRun r = run_cli(stylize_args(dir / "no" / "o.png", {"--iters", "0", "--scales", "1"}));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("no"), std::string::npos);
}

TEST(CliUsage, MissingWeightFileIsIoError) {
  testing::TempDir dir;
  const CliRun r = run_cli({"stylize", "--content", kContent, "--style", kStyle, "--out",
                         (dir / "o.png").string(), "--weights", (dir / "w.stwt").string(),
                         "--iters", "0"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("w.stwt"), std::string::npos);
}

TEST(CliUsage, ExitCodeMapping) {
  EXPECT_EQ(cli::exit_code_for(IoError("x")), 1);
  EXPECT_EQ(cli::exit_code_for(FormatError("x")), 1);
  EXPECT_EQ(cli::exit_code_for(ResourceError("x")), 1);
  EXPECT_EQ(cli::exit_code_for(std::runtime_error("x")), 1);
  EXPECT_EQ(cli::exit_code_for(ValidationError("x")), 3);
  EXPECT_EQ(cli::exit_code_for(ParseError("x")), 3);
  EXPECT_EQ(cli::exit_code_for(SpecError("x")), 3);
  EXPECT_EQ(cli::exit_code_for(PreconditionError("x")), 3);
  EXPECT_EQ(cli::exit_code_for(ShapeError("x")), 3);
}

// Stylize

TEST(CliStylize, ZeroIterationsWritesInitialization) {
  testing::TempDir dir;
  const CliRun r = run_cli(stylize_args(dir / "o.png", {"--iterations", "0", "--scales", "1"}));
  ASSERT_EQ(r.code, 0) << r.err;
  StylizeConfig cfg;
  cfg.iterations = 0;
  cfg.scale_count = 1;
  const StylizeResult direct =
      stylize(load_image(kContent), load_image(kStyle), random_weights(7), cfg);
  EXPECT_EQ(testing::read_bytes(dir / "o.png"), encode_png(direct.image));
}

TEST(CliStylize, LogHasOneJsonRecordPerIteration) {
  testing::TempDir dir;
  const CliRun r = run_cli(stylize_args(
      dir / "o.png", {"--iters", "2", "--scales", "1", "--log", (dir / "log.jsonl").string()}));
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(dir / "log.jsonl");
  std::vector<nlohmann::json> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(nlohmann::json::parse(l));
  ASSERT_EQ(lines.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& j = lines[i];
    EXPECT_EQ(j["scale"], 1);
    EXPECT_EQ(j["iter"], i);
    EXPECT_EQ(j["alpha"], 8.0);
    EXPECT_EQ(j["long_side"], 64);
    const double total = combine_losses<double>(j["lc"], j["lm"], j["lr"], j["lp"], 8.0);
    EXPECT_NEAR(j["total"].get<double>(), total, 1e-6 * total);
  }
}

TEST(CliStylize, IsAThinShellOverTheLibrary) {
  testing::TempDir dir;
  const CliRun r = run_cli(stylize_args(
      dir / "o.png", {"--iters", "2", "--scales", "1", "--seed", "5", "--alpha", "4",
                      "--style-loss", "remd-moment", "--ground-metric", "l2"}));
  ASSERT_EQ(r.code, 0) << r.err;
  StylizeConfig cfg;
  cfg.iterations = 2;
  cfg.scale_count = 1;
  cfg.seed = 5;
  cfg.alpha_base = 4;
  cfg.style_loss = StyleLossMode::RemdMoment;
  cfg.ground_metric = GroundMetric::Euclidean;
  const StylizeResult direct =
      stylize(load_image(kContent), load_image(kStyle), random_weights(7), cfg);
  EXPECT_EQ(testing::read_bytes(dir / "o.png"), encode_png(direct.image));

  cli::JobConfig job;
  job.content = kContent;
  job.style = kStyle;
  job.out = dir / "unused.png";
  job.weights.random_seed = 7;
  job.stylize = cfg;
  EXPECT_EQ(cli::execute_stylize(job).image, direct.image);
}

TEST(CliStylize, WeightFileMatchesRandomWeightsOfTheSameSeed) {
  testing::TempDir dir;
  save_weights(dir / "w.stwt", random_weights(7));
  const std::vector<std::string> common{"--content", kContent, "--style", kStyle,
                                        "--iters", "1", "--scales", "1"};
  auto args = [&](std::string out, std::vector<std::string> w) {
    std::vector<std::string> a{"stylize", "--out", out};
    a.insert(a.end(), common.begin(), common.end());
    a.insert(a.end(), w.begin(), w.end());
    return a;
  };
  ASSERT_EQ(run_cli(args((dir / "a.png").string(), {"--weights", (dir / "w.stwt").string()})).code, 0);
  ASSERT_EQ(run_cli(args((dir / "b.png").string(), {"--random-weights", "7"})).code, 0);
  EXPECT_EQ(testing::read_bytes(dir / "a.png"), testing::read_bytes(dir / "b.png"));
}

TEST(CliStylize, RegionMasksRun) {
  testing::TempDir dir;
  save_mask(dir / "cm.png", {64, 64}, [](auto y, auto) { return y < 32 ? 1 : 0; });
  save_mask(dir / "sm.png", {64, 64}, [](auto, auto x) { return x < 32 ? 1 : 0; });
  const CliRun r = run_cli(stylize_args(
      dir / "o.png", {"--iters", "1", "--scales", "1", "--content-mask",
                      (dir / "cm.png").string(), "--style-mask", (dir / "sm.png").string()}));
  EXPECT_EQ(r.code, 0) << r.err;
}

TEST(CliStylize, MaskSizeMismatchIsValidationError) {
  testing::TempDir dir;
  save_mask(dir / "cm.png", {32, 64}, [](auto, auto) { return 1; });
  save_mask(dir / "sm.png", {64, 64}, [](auto, auto) { return 1; });
  const CliRun r = run_cli(stylize_args(
      dir / "o.png", {"--iters", "0", "--scales", "1", "--content-mask",
                      (dir / "cm.png").string(), "--style-mask", (dir / "sm.png").string()}));
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("cm.png"), std::string::npos);
}

TEST(CliStylize, MalformedPointsFileIsValidationError) {
  testing::TempDir dir;
  testing::write_text(dir / "p.txt", "10 10 20 20\n\n1 2 three 4\n");
  const CliRun r = run_cli(stylize_args(
      dir / "o.png", {"--iters", "0", "--scales", "1", "--points", (dir / "p.txt").string()}));
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;
}

// Guidance parsing

TEST(CliGuidance, ParsePointsSwapsToRowColumn) {
  std::istringstream in("# header\n256 128 100 50  # trailing\n\n  1.5 2.5 3 4\n");
  const auto p = cli::parse_points(in);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p[0].content, (Coord{128, 256}));
  EXPECT_EQ(p[0].style, (Coord{50, 100}));
  EXPECT_EQ(p[1].content, (Coord{2.5, 1.5}));
}

TEST(CliGuidance, ParsePointsReportsLineNumber) {
  for (const char* bad : {"1 2 3\n", "1 2 3 4 5\n", "1 2 3 x\n", "1 2 3 4e\n", "nan 1 2 3\n"}) {
    std::istringstream in(std::string("0 0 0 0\n") + bad);
    try {
      cli::parse_points(in);
      ADD_FAILURE() << "accepted " << bad;
    } catch (const ParseError& e) {
      EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
    }
  }
}

TEST(CliGuidance, PointsFileExpandsToNinePairs) {
  testing::TempDir dir;
  testing::write_text(dir / "p.txt", "256 256 100 100\n");
  const GuidanceSpec spec =
      cli::parse_guidance(std::nullopt, std::nullopt, dir / "p.txt", {512, 512}, {512, 512}, 5);
  ASSERT_EQ(spec.pairs.size(), 9u);
  EXPECT_EQ(spec.binding, GuidanceBinding::Point);
  std::set<std::pair<double, double>> got;
  for (const auto& p : spec.pairs) {
    got.insert({p.output[0].y, p.output[0].x});
    EXPECT_EQ(p.style[0].y - 100, p.output[0].y - 256);
  }
  EXPECT_EQ(got.size(), 9u);
  EXPECT_TRUE(got.count({236, 276}));
}

TEST(CliGuidance, PointOutsideImageIsValidationError) {
  testing::TempDir dir;
  testing::write_text(dir / "p.txt", "600 10 10 10\n");
  EXPECT_THROW(
      cli::parse_guidance(std::nullopt, std::nullopt, dir / "p.txt", {512, 512}, {512, 512}, 5),
      ValidationError);
}

TEST(CliGuidance, MasksTopHalfAgainstLeftHalf) {
  testing::TempDir dir;
  save_mask(dir / "cm.png", {8, 6}, [](auto y, auto) { return y < 4 ? 1 : 0; });
  save_mask(dir / "sm.png", {6, 10}, [](auto, auto x) { return x < 5 ? 1 : 0; });
  const GuidanceSpec spec =
      cli::parse_guidance(dir / "cm.png", dir / "sm.png", std::nullopt, {8, 6}, {6, 10}, 2.5);
  ASSERT_EQ(spec.pairs.size(), 1u);
  EXPECT_EQ(spec.beta, 2.5);
  EXPECT_EQ(spec.pairs[0].output.size(), 24u);
  EXPECT_EQ(spec.pairs[0].style.size(), 30u);
  for (const Coord& c : spec.pairs[0].output) EXPECT_LT(c.y, 4);
  for (const Coord& c : spec.pairs[0].style) EXPECT_LT(c.x, 5);
}

TEST(CliGuidance, ZeroMasksGiveEmptySpec) {
  testing::TempDir dir;
  save_mask(dir / "z.png", {8, 8}, [](auto, auto) { return 0; });
  EXPECT_TRUE(
      cli::parse_guidance(dir / "z.png", dir / "z.png", std::nullopt, {8, 8}, {8, 8}, 5).empty());
  EXPECT_TRUE(cli::parse_guidance(std::nullopt, std::nullopt, std::nullopt, {8, 8}, {8, 8}, 5)
                  .empty());
}

TEST(CliGuidance, OneSidedRegionAndColorMaskAreValidationErrors) {
  testing::TempDir dir;
  save_mask(dir / "cm.png", {8, 8}, [](auto y, auto) { return y < 4 ? 1 : 2; });
  save_mask(dir / "sm.png", {8, 8}, [](auto, auto) { return 1; });
  EXPECT_THROW(cli::parse_guidance(dir / "cm.png", dir / "sm.png", std::nullopt, {8, 8}, {8, 8}, 5),
               ValidationError);
  EXPECT_THROW(cli::parse_guidance(kAssets / "toy_content.png", dir / "sm.png", std::nullopt,
                                   {64, 64}, {8, 8}, 5),
               ValidationError);
}

// Tightness

TEST(CliTightness, IdenticalSetsGiveRatioOne) {
  const CliRun r = run_cli({"tightness", "--pairs", "1", "--n", "4", "--identical"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["count"], 1);
  EXPECT_EQ(j["mean"], 1.0);
  EXPECT_EQ(j["std"], 0.0);
}

TEST(CliTightness, DeterministicAndBounded) {
  const std::vector<std::string> args{"tightness", "--pairs", "5", "--n", "32", "--seed", "3"};
  const CliRun a = run_cli(args), b = run_cli(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  const auto j = nlohmann::json::parse(a.out);
  EXPECT_GT(j["mean"].get<double>(), 0.0);
  EXPECT_LT(j["mean"].get<double>(), 1.0);
  const TightnessStudy s = cli::execute_tightness({5, 32, 32, 3});
  EXPECT_EQ(j["mean"].get<double>(), s.mean);
}

TEST(CliTightness, OverBudgetIsReported) {
  const CliRun r = run_cli({"tightness", "--pairs", "1", "--n", "100000", "--memory-budget-mb", "64"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("budget"), std::string::npos);
}

TEST(CliTightness, ImagePairsUseNetworkFeatures) {
  testing::TempDir dir;
  testing::write_text(dir / "pairs.txt", kContent + " " + kStyle + "\n");
  const CliRun r = run_cli({"tightness", "--image-pairs", (dir / "pairs.txt").string(), "--n", "64",
                         "--long-side", "64", "--random-weights", "7"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["count"], 1);
  EXPECT_GT(j["mean"].get<double>(), 0.0);
  EXPECT_LE(j["mean"].get<double>(), 1.0 + 1e-6);
  EXPECT_EQ(run_cli({"tightness", "--image-pairs", (dir / "pairs.txt").string()}).code, 2);
  testing::write_text(dir / "bad.txt", kContent + "\n");
  EXPECT_EQ(run_cli({"tightness", "--image-pairs", (dir / "bad.txt").string(),
                     "--random-weights", "7", "--n", "16", "--long-side", "32"})
                .code,
            3);
}

// Parity

struct ParityFiles {
  testing::TempDir dir;
  std::vector<stwt::Entry> golden;

  ParityFiles() {
    const WeightStore w = random_weights(11);
    save_weights(dir / "w.stwt", w);
    std::vector<Tensor> kernels, biases;
    for (std::size_t i = 0; i < w.size(); ++i) {
      kernels.push_back(*w.layer(i).kernel);
      biases.push_back(*w.layer(i).bias);
    }
    const auto acts =
        testing::ref::vgg_activations(load_image(kAssets / "test16.png"), kernels, biases);
    const auto keep = NetworkSpec::default_keep_set();
    for (std::size_t i = 0; i < acts.size(); ++i)
      golden.push_back({activation_entry_name(keep[i]), acts[i].cast<float>(), {}});
    stwt::write(dir / "golden.stwt", golden);
  }
  std::vector<std::string> args() const {
    return {"parity", "--weights", (dir / "w.stwt").string(), "--golden",
            (dir / "golden.stwt").string(), "--image", (kAssets / "test16.png").string()};
  }
};

TEST(CliParity, MatchesIndependentReference) {
  const ParityFiles f;
  const CliRun r = run_cli(f.args());
  ASSERT_EQ(r.code, 0) << r.err << r.out;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_TRUE(j["pass"].get<bool>());
  EXPECT_LE(j["max_abs"].get<double>(), 1e-3);
  EXPECT_EQ(j["layers"].size(), 9u);
  EXPECT_EQ(j["layers"][8]["name"], "act_conv11");
}

TEST(CliParity, PerturbedGoldenFails) {
  ParityFiles f;
  f.golden[4].tensor[17] += 0.01f;
  stwt::write(f.dir / "golden.stwt", f.golden);
  const CliRun r = run_cli(f.args());
  EXPECT_EQ(r.code, 3);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_FALSE(j["pass"].get<bool>());
  EXPECT_NEAR(j["layers"][4]["max_abs"].get<double>(), 0.01, 1e-3);
}

TEST(CliParity, WrongShapeIsSpecError) {
  ParityFiles f;
  f.golden[0].tensor = Tensor({64, 8, 8});
  stwt::write(f.dir / "golden.stwt", f.golden);
  EXPECT_EQ(run_cli(f.args()).code, 3);
}

}  // namespace
}  // namespace strotss
