#include "ettvb/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "ettvb/serialization.hpp"

namespace ettvb {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Enough digits to reproduce aggregates to ~1e-14 relative while keeping the
// text free of last-bit noise.
constexpr int kSummaryDigits = 15;

double rounded(double v) { return round_significant(v, kSummaryDigits); }

json mean_std_json(const MeanStd& m) { return json{{"mean", rounded(m.mean)}, {"std", rounded(m.std)}}; }

json gw_json(const GwBreakdown& g) {
  return json{{"center_term", rounded(g.center_term)}, {"extent_term", rounded(g.extent_term)}, {"distance", rounded(g.distance)}};
}

json vec_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(rounded(v(i)));
  return out;
}

json mat_json(const Mat2& m) {
  return json::array({json::array({rounded(m(0, 0)), rounded(m(0, 1))}), json::array({rounded(m(1, 0)), rounded(m(1, 1))})});
}

json belief_summary(const TargetBelief& b) {
  return json{{"kinematics_mean", vec_json(b.kinematics.mean)},
              {"orientation_mean", rounded(b.orientation.mean)},
              {"orientation_var", rounded(b.orientation.variance)},
              {"alpha", vec_json(b.extent.shape)},
              {"beta", vec_json(b.extent.scale)}};
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void close_output(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw std::runtime_error("error while writing " + path.string());
}

// ---- plotting ------------------------------------------------------------

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  [[nodiscard]] std::size_t column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::runtime_error("runs.csv lacks column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  }
};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + " is empty");
  t.header = split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != t.header.size()) throw std::runtime_error(path.string() + ": ragged row");
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(std::stod(c));
    t.rows.push_back(std::move(row));
  }
  return t;
}

struct Ellipse {
  double cx, cy, ax1, ax2, theta;
};

struct Frame {
  double min_x, max_x, min_y, max_y;
  double width = 800.0, height = 600.0, pad = 40.0;

  [[nodiscard]] double scale() const {
    return std::min((width - 2 * pad) / std::max(max_x - min_x, 1e-9),
                    (height - 2 * pad) / std::max(max_y - min_y, 1e-9));
  }
  [[nodiscard]] double sx(double x) const { return pad + (x - min_x) * scale(); }
  [[nodiscard]] double sy(double y) const { return height - pad - (y - min_y) * scale(); }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

void svg_ellipse(std::ostream& out, const Frame& f, const Ellipse& e, const char* stroke, const char* dash) {
  const double s = f.scale();
  // The SVG y axis points down, so rotations flip sign.
  out << "  <ellipse cx=\"" << num(f.sx(e.cx)) << "\" cy=\"" << num(f.sy(e.cy)) << "\" rx=\""
      << num(std::sqrt(e.ax1) * s) << "\" ry=\"" << num(std::sqrt(e.ax2) * s) << "\" transform=\"rotate("
      << num(-e.theta * 180.0 / std::numbers::pi) << ' ' << num(f.sx(e.cx)) << ' ' << num(f.sy(e.cy))
      << ")\" fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.5\"";
  if (dash != nullptr) out << " stroke-dasharray=\"" << dash << '"';
  out << "/>\n";
}

void write_trajectory_svg(const CsvTable& t, const std::vector<int>& requested_frames, const fs::path& path) {
  const std::size_t c_run = t.column("run"), c_step = t.column("step");
  const std::size_t c_tx = t.column("truth_x"), c_ty = t.column("truth_y"), c_tt = t.column("truth_theta");
  const std::size_t c_ta1 = t.column("truth_ax1"), c_ta2 = t.column("truth_ax2");
  const std::size_t c_ex = t.column("est_x"), c_ey = t.column("est_y"), c_et = t.column("est_theta");
  const std::size_t c_ea1 = t.column("est_ax1"), c_ea2 = t.column("est_ax2");

  std::vector<const std::vector<double>*> run0;
  for (const auto& row : t.rows) {
    if (row[c_run] == 0.0) run0.push_back(&row);
  }
  if (run0.empty()) throw std::runtime_error("runs.csv has no rows for run 0");

  std::vector<int> frames = requested_frames;
  const int n_steps = static_cast<int>(run0.size());
  if (frames.empty()) {
    const int every = std::max(1, n_steps / 8);
    for (int k = 0; k < n_steps; k += every) frames.push_back(k);
  }
  frames.erase(std::remove_if(frames.begin(), frames.end(), [&](int k) { return k < 0 || k >= n_steps; }),
               frames.end());

  Frame f{std::numeric_limits<double>::max(), std::numeric_limits<double>::lowest(),
          std::numeric_limits<double>::max(), std::numeric_limits<double>::lowest()};
  auto grow = [&f](double x, double y, double r) {
    f.min_x = std::min(f.min_x, x - r);
    f.max_x = std::max(f.max_x, x + r);
    f.min_y = std::min(f.min_y, y - r);
    f.max_y = std::max(f.max_y, y + r);
  };
  for (const auto* row : run0) {
    grow((*row)[c_tx], (*row)[c_ty], 0.0);
    grow((*row)[c_ex], (*row)[c_ey], 0.0);
  }
  for (int k : frames) {
    const auto& row = *run0[static_cast<std::size_t>(k)];
    grow(row[c_tx], row[c_ty], std::sqrt(std::max(row[c_ta1], row[c_ta2])));
    grow(row[c_ex], row[c_ey], std::sqrt(std::max(row[c_ea1], row[c_ea2])));
  }

  std::ofstream out = open_output(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width << "\" height=\"" << f.height
      << "\" viewBox=\"0 0 " << f.width << ' ' << f.height << "\">\n";
  out << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  auto polyline = [&](std::size_t cx, std::size_t cy, const char* stroke, const char* dash) {
    out << "  <polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1\"";
    if (dash != nullptr) out << " stroke-dasharray=\"" << dash << '"';
    out << " points=\"";
    for (const auto* row : run0) out << num(f.sx((*row)[cx])) << ',' << num(f.sy((*row)[cy])) << ' ';
    out << "\"/>\n";
  };
  polyline(c_tx, c_ty, "#888888", nullptr);
  polyline(c_ex, c_ey, "#1f4e9c", "4 3");
  for (int k : frames) {
    const auto& row = *run0[static_cast<std::size_t>(k)];
    svg_ellipse(out, f, {row[c_tx], row[c_ty], row[c_ta1], row[c_ta2], row[c_tt]}, "#888888", nullptr);
    svg_ellipse(out, f, {row[c_ex], row[c_ey], row[c_ea1], row[c_ea2], row[c_et]}, "#1f4e9c", "4 3");
    out << "  <text x=\"" << num(f.sx(row[c_tx]) + 4) << "\" y=\"" << num(f.sy(row[c_ty]) - 4)
        << "\" font-size=\"10\" font-family=\"sans-serif\">" << static_cast<int>(row[c_step]) << "</text>\n";
  }
  out << "  <text x=\"" << f.pad << "\" y=\"20\" font-size=\"12\" font-family=\"sans-serif\">"
      << "run 0: truth (grey, solid) and estimate (blue, dashed)</text>\n";
  out << "</svg>\n";
  close_output(out, path);
}

void write_gw_svg(const CsvTable& t, const fs::path& path) {
  const std::size_t c_step = t.column("step"), c_gw = t.column("gw_distance");
  std::map<int, std::pair<double, int>> per_step;
  for (const auto& row : t.rows) {
    auto& acc = per_step[static_cast<int>(row[c_step])];
    acc.first += row[c_gw];
    acc.second += 1;
  }
  std::vector<std::pair<double, double>> pts;
  double max_gw = 0.0;
  for (const auto& [k, acc] : per_step) {
    const double v = acc.first / acc.second;
    pts.emplace_back(k, v);
    max_gw = std::max(max_gw, v);
  }
  const double last_step = pts.empty() ? 1.0 : std::max(1.0, pts.back().first);
  const double w = 800.0, h = 400.0, pad = 50.0;
  const double top = max_gw > 0.0 ? max_gw * 1.05 : 1.0;
  auto px = [&](double k) { return pad + k / last_step * (w - 2 * pad); };
  auto py = [&](double v) { return h - pad - v / top * (h - 2 * pad); };

  std::ofstream out = open_output(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n";
  out << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "  <line x1=\"" << pad << "\" y1=\"" << h - pad << "\" x2=\"" << w - pad << "\" y2=\"" << h - pad
      << "\" stroke=\"black\"/>\n";
  out << "  <line x1=\"" << pad << "\" y1=\"" << pad << "\" x2=\"" << pad << "\" y2=\"" << h - pad
      << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = top * i / 4.0;
    out << "  <text x=\"" << pad - 6 << "\" y=\"" << num(py(v) + 4)
        << "\" font-size=\"10\" font-family=\"sans-serif\" text-anchor=\"end\">" << num(v) << "</text>\n";
  }
  out << "  <text x=\"" << w - pad << "\" y=\"" << h - pad + 16
      << "\" font-size=\"10\" font-family=\"sans-serif\" text-anchor=\"end\">step " << last_step << "</text>\n";
  out << "  <text x=\"" << pad << "\" y=\"20\" font-size=\"12\" font-family=\"sans-serif\">"
      << "GW distance (m), mean over runs</text>\n";
  out << "  <polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1.5\" points=\"";
  for (const auto& [k, v] : pts) out << num(px(k)) << ',' << num(py(v)) << ' ';
  out << "\"/>\n</svg>\n";
  close_output(out, path);
}

}  // namespace

json summary_json(const CampaignReport& report) {
  const ScenarioSpec& spec = report.spec;
  json per_run = json::array();
  for (const RunResult& r : report.runs) {
    per_run.push_back(json{{"run", r.run},
                           {"mean_gw", rounded(r.mean_gw)},
                           {"mean_center_term", rounded(r.mean_center_term)},
                           {"mean_extent_term", rounded(r.mean_extent_term)},
                           {"heading_rmse_deg", rounded(r.heading_rmse_deg)}});
  }
  return json{{"scenario", spec.name},
              {"trajectory", to_string(spec.trajectory)},
              {"measurement_law", to_string(spec.law)},
              {"steps", spec.steps},
              {"runs", static_cast<int>(report.runs.size())},
              {"seed", spec.seed},
              {"heading_wrap", report.wrap == HeadingWrap::Axial ? "axial" : "none"},
              {"plot_frames", spec.plot_frames},
              {"aggregate", {{"gw_distance", mean_std_json(report.aggregate.gw)},
                             {"gw_center_term", mean_std_json(report.aggregate.center_term)},
                             {"gw_extent_term", mean_std_json(report.aggregate.extent_term)},
                             {"heading_rmse_deg", mean_std_json(report.aggregate.heading_rmse_deg)}}},
              {"per_run", per_run}};
}

void emit_report(const CampaignReport& report, const fs::path& out_dir) {
  if (report.runs.empty()) throw std::invalid_argument("campaign has no runs; nothing to report");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());

  {
    const fs::path path = out_dir / "summary.json";
    std::ofstream out = open_output(path);
    out << summary_json(report).dump(2) << '\n';
    close_output(out, path);
  }
  {
    const fs::path path = out_dir / "runs.csv";
    std::ofstream out = open_output(path);
    out << "run,step,measurements,truth_x,truth_y,truth_theta,truth_ax1,truth_ax2,"
           "est_x,est_y,est_theta,est_ax1,est_ax2,gw_center_term,gw_extent_term,gw_distance,"
           "heading_error_deg\n";
    for (const RunResult& r : report.runs) {
      for (const StepRecord& s : r.steps) {
        out << r.run << ',' << s.step << ',' << s.measurements << ',' << fmt17(s.truth.position.x()) << ','
            << fmt17(s.truth.position.y()) << ',' << fmt17(s.truth.orientation) << ','
            << fmt17(s.truth.extent_diag(0)) << ',' << fmt17(s.truth.extent_diag(1)) << ','
            << fmt17(s.est_position.x()) << ',' << fmt17(s.est_position.y()) << ',' << fmt17(s.est_orientation)
            << ',' << fmt17(s.est_extent_diag(0)) << ',' << fmt17(s.est_extent_diag(1)) << ','
            << fmt17(s.gw.center_term) << ',' << fmt17(s.gw.extent_term) << ',' << fmt17(s.gw.distance) << ','
            << fmt17(s.heading_error * 180.0 / std::numbers::pi) << '\n';
      }
    }
    close_output(out, path);
  }
  {
    const fs::path path = out_dir / "timing.csv";
    std::ofstream out = open_output(path);
    out << "run,wall_time_s\n";
    for (const RunResult& r : report.runs) out << r.run << ',' << fmt17(r.wall_time) << '\n';
    close_output(out, path);
  }
  {
    std::vector<GroundTruthState> truth;
    for (const StepRecord& s : report.runs.front().steps) truth.push_back(s.truth);
    write_truth_csv(truth, out_dir / "truth.csv");
  }
  plot_results(out_dir);
}

void plot_results(const fs::path& results_dir) {
  std::vector<int> frames;
  const fs::path summary_path = results_dir / "summary.json";
  std::ifstream in(summary_path);
  if (!in) throw std::runtime_error("cannot open " + summary_path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const json summary = parse_json_text(buf.str(), summary_path.string());
  if (summary.contains("plot_frames")) frames = summary.at("plot_frames").get<std::vector<int>>();

  const CsvTable table = read_csv(results_dir / "runs.csv");
  write_trajectory_svg(table, frames, results_dir / "trajectory.svg");
  write_gw_svg(table, results_dir / "gw.svg");
}

json oracle_json(const OracleComparison& cmp) {
  return json{{"measurements", cmp.measurements},
              {"samples", cmp.samples},
              {"effective_sample_size", rounded(cmp.effective_sample_size)},
              {"prior", belief_summary(cmp.prior)},
              {"posterior", belief_summary(cmp.posterior)},
              {"one_sweep", belief_summary(cmp.one_sweep)},
              {"oracle", {{"center", vec_json(cmp.oracle_center)},
                          {"theta", rounded(cmp.oracle_theta)},
                          {"extent", mat_json(cmp.oracle_extent)}}},
              {"gw_to_oracle", {{"prior", gw_json(cmp.prior_to_oracle)},
                                {"posterior", gw_json(cmp.posterior_to_oracle)},
                                {"one_sweep", gw_json(cmp.one_sweep_to_oracle)}}}};
}

}  // namespace ettvb
