#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

#include "fapprox/harness.hpp"

namespace fapprox {

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void write_records_csv(std::ostream& out, const std::vector<ResultRecord>& records) {
  out << "method,m,trial,rel_error,wall_seconds,iterations,max_abs_weight,residual,"
         "stop_reason,diverged\n";
  out.precision(17);
  for (const auto& r : records)
    out << csv_escape(r.method) << ',' << r.m << ',' << r.trial << ',' << r.rel_error << ','
        << r.wall_seconds << ',' << r.iterations << ',' << r.max_abs_weight << ',' << r.residual
        << ',' << csv_escape(r.stop_reason) << ',' << (r.diverged ? 1 : 0) << '\n';
}

std::vector<ResultRecord> read_records_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("method,", 0) != 0)
    throw std::runtime_error("read_records_csv: bad header");
  std::vector<ResultRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 10) throw std::runtime_error("read_records_csv: bad row");
    ResultRecord r;
    r.method = cells[0];
    r.m = std::stoi(cells[1]);
    r.trial = std::stoi(cells[2]);
    r.rel_error = std::stod(cells[3]);
    r.wall_seconds = std::stod(cells[4]);
    r.iterations = std::stoll(cells[5]);
    r.max_abs_weight = std::stod(cells[6]);
    r.residual = std::stod(cells[7]);
    r.stop_reason = cells[8];
    r.diverged = cells[9] == "1";
    records.push_back(std::move(r));
  }
  return records;
}

void write_summary_csv(std::ostream& out, const SummaryTable& summary) {
  out << "method,m,count,mean,q25,median,q75,min,max,mean_wall,outliers\n";
  out.precision(17);
  for (const auto& row : summary.rows) {
    out << csv_escape(row.method) << ',' << row.m << ',' << row.count << ',' << row.mean << ','
        << row.q25 << ',' << row.median << ',' << row.q75 << ',' << row.min << ',' << row.max
        << ',' << row.mean_wall << ',';
    std::ostringstream olist;
    olist.precision(17);
    for (std::size_t i = 0; i < row.outliers.size(); ++i) {
      if (i) olist << ';';
      olist << row.outliers[i];
    }
    out << csv_escape(olist.str()) << '\n';
  }
}

namespace {

nlohmann::json method_to_json(const MethodSpec& m) {
  nlohmann::json j;
  j["id"] = m.id;
  if (m.is_cs()) {
    const auto& cs = std::get<CsMethodSpec>(m.method);
    j["type"] = "cs";
    j["variant"] = to_string(cs.variant);
    j["weighted"] = cs.weighted;
    j["degree"] = cs.degree;
    j["eta"] = cs.eta;
    j["mu"] = cs.mu;
    j["max_iterations"] = cs.solver.max_iterations;
    j["stop_tolerance"] = cs.solver.stop_tolerance;
    j["step_scale"] = cs.solver.step_scale;
  } else {
    const auto& dnn = std::get<DnnMethodSpec>(m.method);
    j["type"] = "dnn";
    j["hidden_layers"] = dnn.arch.hidden_layers;
    j["width"] = dnn.arch.width;
    j["optimizer"] = dnn.config.optimizer == OptimizerKind::adam ? "adam" : "sgd";
    j["tau_init"] = dnn.config.tau_init;
    j["tau_final"] = dnn.config.tau_final;
    j["k_final"] = dnn.config.k_final;
    j["k_uf"] = dnn.config.k_uf;
    j["eps_tol"] = dnn.config.eps_tol;
    j["batch"] = dnn.config.batch == BatchMode::full    ? "full"
                 : dnn.config.batch == BatchMode::half ? "half"
                                                       : "quarter";
    j["init"] = to_string(dnn.config.init);
    j["seed"] = dnn.config.seed;
    j["precision"] = to_string(dnn.config.precision);
  }
  return j;
}

MethodSpec method_from_json(const nlohmann::json& j) {
  MethodSpec m;
  m.id = j.at("id").get<std::string>();
  const std::string type = j.at("type").get<std::string>();
  if (type == "cs") {
    CsMethodSpec cs;
    cs.variant = cs_variant_from_string(j.value("variant", "qcbp"));
    cs.weighted = j.value("weighted", true);
    cs.degree = j.at("degree").get<int>();
    cs.eta = j.value("eta", -1.0);
    cs.mu = j.value("mu", -1.0);
    cs.solver.max_iterations = j.value("max_iterations", cs.solver.max_iterations);
    cs.solver.stop_tolerance = j.value("stop_tolerance", cs.solver.stop_tolerance);
    cs.solver.step_scale = j.value("step_scale", cs.solver.step_scale);
    m.method = cs;
  } else if (type == "dnn") {
    DnnMethodSpec dnn;
    dnn.arch.hidden_layers = j.at("hidden_layers").get<int>();
    dnn.arch.width = j.at("width").get<int>();
    const std::string opt = j.value("optimizer", "adam");
    dnn.config.optimizer = opt == "sgd" ? OptimizerKind::sgd : OptimizerKind::adam;
    dnn.config.tau_init = j.value("tau_init", dnn.config.tau_init);
    dnn.config.tau_final = j.value("tau_final", dnn.config.tau_final);
    dnn.config.k_final = j.value("k_final", dnn.config.k_final);
    dnn.config.k_uf = j.value("k_uf", dnn.config.k_uf);
    dnn.config.eps_tol = j.value("eps_tol", dnn.config.eps_tol);
    const std::string batch = j.value("batch", "full");
    dnn.config.batch = batch == "half"      ? BatchMode::half
                       : batch == "quarter" ? BatchMode::quarter
                                            : BatchMode::full;
    dnn.config.init = init_strategy_from_string(j.value("init", "normal_fixed"));
    dnn.config.seed = j.value("seed", 0ull);
    dnn.config.precision = precision_from_string(j.value("precision", "double"));
    m.method = dnn;
  } else {
    throw std::invalid_argument("method type must be 'cs' or 'dnn'");
  }
  return m;
}

nlohmann::json spec_to_json(const ExperimentSpec& spec) {
  nlohmann::json j;
  j["target"] = {{"name", spec.target.name}, {"dim", spec.target.dim}, {"K", spec.target.K}};
  j["methods"] = nlohmann::json::array();
  for (const auto& m : spec.methods) j["methods"].push_back(method_to_json(m));
  j["sample_grid"] = spec.sample_grid;
  j["trials"] = spec.trials;
  j["base_seed"] = spec.base_seed;
  j["quadrature"] = {{"level", spec.quad_level},
                     {"qmc", spec.qmc},
                     {"qmc_points", spec.qmc_points}};
  j["noise_sigma"] = spec.noise_sigma;
  j["output_dir"] = spec.output_dir;
  j["threads"] = spec.threads;
  j["environment"] = {{"library", "fapprox"}, {"version", "0.1.0"}};
  return j;
}

}  // namespace

std::string spec_to_json_text(const ExperimentSpec& spec) { return spec_to_json(spec).dump(2); }

ExperimentSpec spec_from_json_text(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  ExperimentSpec spec;
  spec.target.name = j.at("target").at("name").get<std::string>();
  spec.target.dim = j.at("target").at("dim").get<int>();
  spec.target.K = j.at("target").value("K", 1);
  for (const auto& m : j.at("methods")) spec.methods.push_back(method_from_json(m));
  spec.sample_grid = j.at("sample_grid").get<std::vector<int>>();
  spec.trials = j.value("trials", 5);
  spec.base_seed = j.value("base_seed", 0ull);
  if (j.contains("quadrature")) {
    spec.quad_level = j["quadrature"].value("level", -1);
    spec.qmc = j["quadrature"].value("qmc", false);
    spec.qmc_points = j["quadrature"].value("qmc_points", Eigen::Index{200'000});
  }
  spec.noise_sigma = j.value("noise_sigma", 0.0);
  spec.output_dir = j.value("output_dir", "out");
  spec.threads = j.value("threads", 0);
  return spec;
}

namespace {

// Minimal hand-rolled SVG: log-log error-vs-m chart with one polyline per
// method and quartile box glyphs.
class SvgChart {
public:
  SvgChart(double x_min, double x_max, double y_min, double y_max)
      : x_min_(std::log10(x_min)), x_max_(std::log10(x_max)),
        y_min_(std::log10(y_min)), y_max_(std::log10(y_max)) {
    if (x_max_ - x_min_ < 1e-9) x_max_ = x_min_ + 1.0;
    if (y_max_ - y_min_ < 1e-9) y_max_ = y_min_ + 1.0;
  }

  double px(double x) const {
    return kLeft + (std::log10(x) - x_min_) / (x_max_ - x_min_) * (kWidth - kLeft - kRight);
  }
  double py(double y) const {
    return kHeight - kBottom -
           (std::log10(y) - y_min_) / (y_max_ - y_min_) * (kHeight - kTop - kBottom);
  }

  void header(std::ostream& out) const {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    // frame
    out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kWidth - kLeft - kRight
        << "\" height=\"" << kHeight - kTop - kBottom
        << "\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n";
    // decade ticks
    for (int e = static_cast<int>(std::ceil(y_min_)); e <= static_cast<int>(std::floor(y_max_));
         ++e) {
      const double y = py(std::pow(10.0, e));
      out << "<line x1=\"" << kLeft << "\" y1=\"" << y << "\" x2=\"" << kWidth - kRight
          << "\" y2=\"" << y << "\" stroke=\"#ddd\" stroke-width=\"1\"/>\n"
          << "<text x=\"" << kLeft - 8 << "\" y=\"" << y + 4
          << "\" font-size=\"11\" text-anchor=\"end\">1e" << e << "</text>\n";
    }
    for (int e = static_cast<int>(std::ceil(x_min_)); e <= static_cast<int>(std::floor(x_max_));
         ++e) {
      const double x = px(std::pow(10.0, e));
      out << "<line x1=\"" << x << "\" y1=\"" << kTop << "\" x2=\"" << x << "\" y2=\""
          << kHeight - kBottom << "\" stroke=\"#ddd\" stroke-width=\"1\"/>\n"
          << "<text x=\"" << x << "\" y=\"" << kHeight - kBottom + 16
          << "\" font-size=\"11\" text-anchor=\"middle\">1e" << e << "</text>\n";
    }
    out << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kHeight - 8
        << "\" font-size=\"12\" text-anchor=\"middle\">samples m</text>\n";
    out << "<text x=\"14\" y=\"" << (kTop + kHeight - kBottom) / 2
        << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
        << (kTop + kHeight - kBottom) / 2 << ")\">relative L2 error</text>\n";
  }

  static constexpr double kWidth = 860, kHeight = 520;
  static constexpr double kLeft = 64, kRight = 170, kTop = 24, kBottom = 48;

private:
  double x_min_, x_max_, y_min_, y_max_;
};

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

void write_errors_svg(std::ostream& out, const SummaryTable& summary) {
  double x_min = 1e300, x_max = 0, y_min = 1e300, y_max = 0;
  for (const auto& row : summary.rows) {
    x_min = std::min(x_min, static_cast<double>(row.m));
    x_max = std::max(x_max, static_cast<double>(row.m));
    y_min = std::min(y_min, std::max(row.min, 1e-300));
    y_max = std::max(y_max, row.max);
  }
  y_min = std::max(y_min * 0.5, 1e-18);
  y_max = std::max(y_max * 2.0, y_min * 10.0);

  SvgChart chart(x_min * 0.9, x_max * 1.1, y_min, y_max);
  chart.header(out);

  std::vector<std::string> methods;
  for (const auto& row : summary.rows)
    if (std::find(methods.begin(), methods.end(), row.method) == methods.end())
      methods.push_back(row.method);

  for (std::size_t k = 0; k < methods.size(); ++k) {
    const char* color = kPalette[k % std::size(kPalette)];
    std::ostringstream points;
    for (const auto& row : summary.rows) {
      if (row.method != methods[k]) continue;
      points << chart.px(row.m) << ',' << chart.py(std::max(row.mean, 1e-300)) << ' ';
      // quartile box + min/max whiskers
      const double bx = chart.px(row.m);
      const double q1 = chart.py(std::max(row.q25, 1e-300));
      const double q3 = chart.py(std::max(row.q75, 1e-300));
      out << "<rect x=\"" << bx - 4 << "\" y=\"" << q3 << "\" width=\"8\" height=\""
          << std::max(0.5, q1 - q3) << "\" fill=\"" << color << "\" fill-opacity=\"0.25\" "
          << "stroke=\"" << color << "\" stroke-width=\"0.8\"/>\n";
      out << "<line x1=\"" << bx << "\" y1=\"" << chart.py(std::max(row.min, 1e-300))
          << "\" x2=\"" << bx << "\" y2=\"" << chart.py(std::max(row.max, 1e-300))
          << "\" stroke=\"" << color << "\" stroke-width=\"0.8\"/>\n";
    }
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.6\" points=\""
        << points.str() << "\"/>\n";
    out << "<text x=\"" << SvgChart::kWidth - SvgChart::kRight + 12 << "\" y=\""
        << SvgChart::kTop + 16 + 16 * static_cast<double>(k) << "\" font-size=\"12\" fill=\""
        << color << "\">" << methods[k] << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace

void export_report(const std::vector<ResultRecord>& records, const SummaryTable& summary,
                   const ExperimentSpec& spec, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);

  // Open every output first so an unwritable directory fails fast.
  std::ofstream records_out(fs::path(dir) / "records.csv");
  std::ofstream summary_out(fs::path(dir) / "summary.csv");
  std::ofstream spec_out(fs::path(dir) / "spec.json");
  if (!records_out || !summary_out || !spec_out)
    throw std::runtime_error("export_report: cannot write to '" + dir + "'");

  write_records_csv(records_out, records);
  write_summary_csv(summary_out, summary);
  spec_out << spec_to_json_text(spec) << '\n';

  if (!records.empty() && !summary.rows.empty()) {
    std::ofstream svg_out(fs::path(dir) / "errors.svg");
    if (!svg_out) throw std::runtime_error("export_report: cannot write errors.svg");
    write_errors_svg(svg_out, summary);
  }
}

}  // namespace fapprox
