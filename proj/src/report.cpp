#include "mlgeom/report.hpp"

#include <sstream>

#include "mlgeom/format.hpp"

namespace mlgeom {

nlohmann::json minimality_report_json(const MinimalityReport& report) {
  using nlohmann::json;
  const auto& cfg = report.config;
  json samples = json::array();
  Index evaluated = 0;
  for (const auto& s : report.samples) {
    json js;
    js["index"] = s.index;
    js["shape"] = cfg.shape.dims();
    js["rank"] = cfg.rank.ranks;
    js["status"] = s.evaluated ? "ok" : "rank_detection_failure";
    if (s.evaluated) {
      ++evaluated;
      js["param_count"] = s.param_count;
      js["gram_min_eig"] = s.gram_min_eig;
      js["curvature_ratio"] = s.curvature_ratio;
      js["off_structure_max"] = s.off_structure_max;
    } else {
      js["error"] = s.failure;
    }
    samples.push_back(std::move(js));
  }
  json summary;
  summary["pass"] = report.pass;
  summary["max_ratio"] = report.max_ratio;
  summary["samples"] = cfg.samples;
  summary["evaluated"] = evaluated;
  summary["rank_failures"] = report.rank_failures;
  summary["tol"] = cfg.tol;
  summary["seed"] = cfg.seed;
  summary["shape"] = cfg.shape.dims();
  summary["rank"] = cfg.rank.ranks;
  return json{{"samples", std::move(samples)}, {"summary", std::move(summary)}};
}

std::string minimality_report_csv(const MinimalityReport& report) {
  auto join = [](const std::vector<Index>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i)
      s += (i ? "x" : "") + std::to_string(v[i]);
    return s;
  };
  std::ostringstream out;
  out << "index,shape,rank,status,param_count,gram_min_eig,curvature_ratio,off_structure_max\n";
  for (const auto& s : report.samples) {
    out << s.index << ',' << join(report.config.shape.dims()) << ',' << join(report.config.rank.ranks) << ','
        << (s.evaluated ? "ok" : "rank_detection_failure") << ',';
    if (s.evaluated)
      out << s.param_count << ',' << format_double(s.gram_min_eig) << ',' << format_double(s.curvature_ratio) << ','
          << format_double(s.off_structure_max);
    else
      out << ",,,";
    out << '\n';
  }
  return out.str();
}

} // namespace mlgeom
