// Command-line front end: rank, verify-minimality, segre-probe, slice-field.
//
// Exit codes: 0 pass, 1 verification failure, 2 usage/validation error,
// 3 precondition failure on the inputs.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mlgeom/report.hpp"
#include "mlgeom/segre.hpp"
#include "mlgeom/tensor_io.hpp"
#include "mlgeom/tucker.hpp"

namespace {

using namespace mlgeom;
using nlohmann::json;

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;
constexpr int kPrecondition = 3;

struct RunConfig {
  std::vector<Index> shape;
  std::vector<Index> rank;
  std::vector<Index> dims{2, 2};
  Index samples = 20;
  std::uint64_t seed = 0;
  double tol = -1.0; // < 0: command default
  double epsilon = 0.1;
  Index grid = 9;
  std::string output;
  std::string format;
  std::string tensor_file;
};

void emit(const RunConfig& cfg, const std::string& text) {
  if (cfg.output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(cfg.output, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write " + cfg.output);
  out << text;
}

int cmd_rank(const RunConfig& cfg) {
  DenseTensor t = read_tensor_file(cfg.tensor_file);
  const auto rank = cfg.tol > 0 ? multilinear_rank(t, cfg.tol) : multilinear_rank(t);
  json j;
  j["ranks"] = rank.ranks;
  json sv = json::array();
  for (const auto& s : flattening_singular_values(t))
    sv.push_back(std::vector<double>(s.data(), s.data() + s.size()));
  j["singular_values_per_mode"] = std::move(sv);
  emit(cfg, j.dump() + "\n");
  return kPass;
}

int cmd_verify_minimality(const RunConfig& cfg) {
  if (cfg.shape.empty() || cfg.rank.empty())
    throw CLI::ValidationError("verify-minimality needs --shape and --rank");
  const std::string format = cfg.format.empty() ? "json" : cfg.format;
  MinimalityConfig mc{Shape(cfg.shape), MultilinearRank{cfg.rank}, cfg.samples, cfg.seed,
                      cfg.tol > 0 ? cfg.tol : 1e-8};
  const MinimalityReport report = verify_minimality(mc);
  emit(cfg, format == "csv" ? minimality_report_csv(report) : minimality_report_json(report).dump(2) + "\n");
  std::cerr << (report.pass ? "PASS" : "FAIL") << " shape " << mc.shape.to_string() << " max_ratio "
            << report.max_ratio << " rank_failures " << report.rank_failures << '\n';
  return report.pass ? kPass : kFail;
}

int cmd_segre_probe(const RunConfig& cfg) {
  const DenseTensor t = read_tensor_file(cfg.tensor_file);
  if (!cfg.shape.empty() && !(Shape(cfg.shape) == t.shape()))
    throw CLI::ValidationError("functional shape " + t.shape().to_string() + " does not match --shape");
  const LinearFunctional ell{t};
  const NormalFrame frame = normal_frame(t.shape());
  const double tol = cfg.tol > 0 ? cfg.tol : 1e-10;
  const WitnessPair w = extremum_witness(ell, frame, cfg.epsilon, tol);

  std::vector<Index> modes, targets;
  for (Index j = 0; j < t.order(); ++j)
    if (w.witness[static_cast<std::size_t>(j)] != 0) {
      modes.push_back(j);
      targets.push_back(w.witness[static_cast<std::size_t>(j)]);
    }
  const ProbeCurve gamma = probe_curve(frame, modes, targets, std::vector<int>(modes.size(), 1));
  const auto pairings = curve_pairings(gamma, ell, static_cast<int>(std::min<Index>(w.k_star, 8)));

  json j;
  j["k_star"] = w.k_star;
  j["coefficient"] = w.coefficient;
  j["witness_index"] = w.witness;
  j["u_plus"] = w.u_plus;
  j["u_minus"] = w.u_minus;
  j["pairing_plus"] = w.pairing_plus;
  j["pairing_minus"] = w.pairing_minus;
  j["curve_pairings"] = pairings;
  emit(cfg, j.dump(2) + "\n");
  return kPass;
}

int cmd_slice_field(const RunConfig& cfg) {
  if (cfg.grid < 2)
    throw CLI::ValidationError("--grid must be at least 2");
  const std::string format = cfg.format.empty() ? "csv" : cfg.format;
  const SliceField field = slice_curvature_field(cfg.dims, cfg.grid);
  double hmin = field.samples.front().norm, hmax = hmin;
  for (const auto& s : field.samples) {
    hmin = std::min(hmin, s.norm);
    hmax = std::max(hmax, s.norm);
  }
  if (format == "csv") {
    emit(cfg, slice_field_csv(field));
  } else {
    json rows = json::array();
    for (const auto& s : field.samples)
      rows.push_back({{"params", std::vector<double>(s.params.data(), s.params.data() + s.params.size())},
                      {"tensor", std::vector<double>(s.point.data(), s.point.data() + s.point.size())},
                      {"H", std::vector<double>(s.mean_curvature.data(),
                                                s.mean_curvature.data() + s.mean_curvature.size())},
                      {"H_norm", s.norm}});
    emit(cfg, json{{"dims", cfg.dims}, {"grid", cfg.grid}, {"rows", rows}}.dump(2) + "\n");
  }
  std::cerr << "rows " << field.samples.size() << " min |H| " << hmin << " max |H| " << hmax << '\n';
  return kPass;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geometry of fixed multilinear-rank tensor manifolds"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_output = [&cfg](CLI::App* sub, bool with_format) {
    sub->add_option("--output", cfg.output, "Output path (default: stdout)");
    if (with_format)
      sub->add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  };

  auto* rank = app.add_subcommand("rank", "Multilinear rank of a tensor file");
  rank->add_option("file", cfg.tensor_file, "Tensor JSON file")->required();
  rank->add_option("--tol", cfg.tol, "Relative singular value threshold")->check(CLI::PositiveNumber);
  add_output(rank, false);

  auto* verify = app.add_subcommand("verify-minimality", "Randomized mean curvature check on T_{d,r}");
  verify->add_option("--shape", cfg.shape, "n_1,...,n_d")->delimiter(',')->required();
  verify->add_option("--rank", cfg.rank, "r_1,...,r_d")->delimiter(',')->required();
  verify->add_option("--samples", cfg.samples, "Number of random points")->check(CLI::PositiveNumber);
  verify->add_option("--seed", cfg.seed, "Campaign seed");
  verify->add_option("--tol", cfg.tol, "Pass threshold on |H| / max|d2 r|")->check(CLI::PositiveNumber);
  add_output(verify, true);

  auto* probe = app.add_subcommand("segre-probe", "Witness curves for a normal functional at e_1 x ... x e_1");
  probe->add_option("file", cfg.tensor_file, "Functional tensor JSON file")->required();
  probe->add_option("--shape", cfg.shape, "Expected shape n_1,...,n_d")->delimiter(',');
  probe->add_option("--epsilon", cfg.epsilon, "Initial curve parameter")->check(CLI::PositiveNumber);
  probe->add_option("--tol", cfg.tol, "Relative level threshold")->check(CLI::PositiveNumber);
  add_output(probe, false);

  auto* field = app.add_subcommand("slice-field", "Mean curvature field of the independence model");
  field->add_option("--dims", cfg.dims, "Number of states per variable")->delimiter(',');
  field->add_option("--grid", cfg.grid, "Grid points per parameter");
  add_output(field, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }

  try {
    if (*rank)
      return cmd_rank(cfg);
    if (*verify)
      return cmd_verify_minimality(cfg);
    if (*probe)
      return cmd_segre_probe(cfg);
    return cmd_slice_field(cfg);
  } catch (const NotNormalError& e) {
    std::cerr << "error: " << e.what() << " (tangent component norm " << e.tangent_norm() << ")\n";
    return kPrecondition;
  } catch (const NoWitnessError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kPrecondition;
  } catch (const NumericalFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFail;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    // bad files, inadmissible ranks and dimension errors
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
}
