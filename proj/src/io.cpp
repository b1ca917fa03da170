#include "ddlure/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ddlure/errors.hpp"

namespace ddlure {

using json = nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<double> parse_row(const std::string& row, std::string_view what) {
  std::vector<double> out;
  std::string tok;
  auto flush = [&] {
    if (tok.empty()) return;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size()) {
      throw ParseError(std::string(what) + ": bad number '" + tok + "'");
    }
    out.push_back(v);
    tok.clear();
  };
  for (char ch : row) {
    if (ch == ',' || ch == ' ' || ch == '\t') {
      flush();
    } else {
      tok.push_back(ch);
    }
  }
  flush();
  return out;
}

Mat from_rows(const std::vector<std::vector<double>>& rows,
              std::string_view what) {
  if (rows.empty()) return Mat(0, 0);
  const std::size_t nc = rows.front().size();
  Mat m(rows.size(), nc);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != nc) {
      throw ParseError(std::string(what) + ": row " + std::to_string(i) +
                       " has " + std::to_string(rows[i].size()) +
                       " entries, expected " + std::to_string(nc));
    }
    for (std::size_t j = 0; j < nc; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

json mat_json(const Mat& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

Mat json_mat(const json& j, std::string_view what) {
  if (!j.is_array()) throw ParseError(std::string(what) + ": expected an array of rows");
  std::vector<std::vector<double>> rows;
  for (const auto& r : j) {
    if (!r.is_array()) throw ParseError(std::string(what) + ": rows must be arrays");
    std::vector<double> row;
    for (const auto& v : r) {
      if (!v.is_number()) throw ParseError(std::string(what) + ": non-numeric entry");
      row.push_back(v.get<double>());
    }
    rows.push_back(std::move(row));
  }
  return from_rows(rows, what);
}

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw ParseError(std::string("missing field '") + key + "'");
  }
  return j.at(key);
}

// Type errors from nlohmann surface as ParseError too.
template <class F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed JSON document: ") + e.what());
  }
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
}

json number_or_null(double v) {
  return std::isfinite(v) ? json(v) : json(nullptr);
}

double number_or_inf(const json& j) {
  return j.is_number() ? j.get<double>() : INFINITY;
}

SolveStatus status_from_string(const std::string& s) {
  if (s == "FEASIBLE") return SolveStatus::kFeasible;
  if (s == "INFEASIBLE") return SolveStatus::kInfeasible;
  if (s == "INCONCLUSIVE") return SolveStatus::kInconclusive;
  throw ParseError("unknown solver status '" + s + "'");
}

}  // namespace

Mat parse_matrix(std::string_view text) {
  std::string s = trim(text);
  if (!s.empty() && s.front() == '[') {
    if (s.back() != ']') throw ParseError("matrix: unbalanced brackets");
    s = s.substr(1, s.size() - 2);
  }
  if (s.find_first_of("[]") != std::string::npos) {
    throw ParseError("matrix: nested brackets are not supported");
  }
  std::vector<std::vector<double>> rows;
  std::stringstream ss(s);
  std::string row;
  while (std::getline(ss, row, ';')) {
    auto vals = parse_row(row, "matrix");
    if (vals.empty()) throw ParseError("matrix: empty row");
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw ParseError("matrix: no entries");
  return from_rows(rows, "matrix");
}

std::string format_matrix(const Mat& m, int precision) {
  std::ostringstream os;
  os.precision(precision);
  os << "[";
  for (Index i = 0; i < m.rows(); ++i) {
    if (i) os << "; ";
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) os << ", ";
      os << m(i, j);
    }
  }
  os << "]";
  return os.str();
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

Mat read_csv(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    rows.push_back(parse_row(line, path.string()));
  }
  if (rows.empty()) throw ParseError(path.string() + ": empty matrix");
  return from_rows(rows, path.string());
}

void write_csv(const fs::path& path, const Mat& m) {
  std::string out;
  char buf[40];
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      if (j) out += ',';
      out += buf;
    }
    out += '\n';
  }
  write_text(path, out);
}

DataSet read_dataset(const fs::path& dir) {
  DataSet d;
  d.U0 = read_csv(dir / "U0.csv");
  d.X0 = read_csv(dir / "X0.csv");
  d.X1 = read_csv(dir / "X1.csv");
  d.F0 = read_csv(dir / "F0.csv");
  const json meta = parse_json(read_text(dir / "meta.json"));
  d.time_domain = time_domain_from_string(field(meta, "time_domain").get<std::string>());
  if (meta.contains("sample_times")) {
    for (const auto& t : meta.at("sample_times")) {
      if (!t.is_number()) throw ParseError("meta.json: non-numeric sample time");
      d.sample_times.push_back(t.get<double>());
    }
  }
  d.validate();
  return d;
}

void write_dataset(const fs::path& dir, const DataSet& data) {
  data.validate();
  fs::create_directories(dir);
  write_csv(dir / "U0.csv", data.U0);
  write_csv(dir / "X0.csv", data.X0);
  write_csv(dir / "X1.csv", data.X1);
  write_csv(dir / "F0.csv", data.F0);
  json meta;
  meta["time_domain"] = std::string(to_string(data.time_domain));
  meta["sample_times"] = data.sample_times;
  write_text(dir / "meta.json", meta.dump(2) + "\n");
}

static PlantModel model_from_json_impl(std::string_view text) {
  const json j = parse_json(text);
  const Mat a = json_mat(field(j, "A"), "A");
  const Mat b = json_mat(field(j, "B"), "B");
  const Mat l = json_mat(field(j, "L"), "L");
  const Mat h = json_mat(field(j, "H"), "H");
  const TimeDomain d =
      time_domain_from_string(field(j, "time_domain").get<std::string>());
  const json& nl = field(j, "nonlinearity");
  NonlinearitySpec spec;
  spec.name = field(nl, "name").get<std::string>();
  if (nl.contains("params")) {
    for (const auto& v : nl.at("params")) spec.params.push_back(v.get<double>());
  }
  return PlantModel(a, b, l, h, spec, d);
}

std::string model_to_json(const PlantModel& model) {
  if (!model.spec()) {
    throw InvalidInput("model_to_json: only catalog nonlinearities can be saved");
  }
  json j;
  j["A"] = mat_json(model.A());
  j["B"] = mat_json(model.B());
  j["L"] = mat_json(model.L());
  j["H"] = mat_json(model.H());
  j["time_domain"] = std::string(to_string(model.time_domain()));
  j["nonlinearity"] = {{"name", model.spec()->name},
                       {"params", model.spec()->params}};
  return j.dump(2) + "\n";
}

PlantModel read_model(const fs::path& path) {
  return model_from_json(read_text(path));
}

void write_model(const fs::path& path, const PlantModel& model) {
  write_text(path, model_to_json(model));
}

static QuadConstraint constraint_from_json_impl(std::string_view text) {
  const json j = parse_json(text);
  const std::string kind = field(j, "kind").get<std::string>();
  ConstraintKind k;
  if (kind == "STRICT_R") {
    k = ConstraintKind::kStrictR;
  } else if (kind == "PASSIVE") {
    k = ConstraintKind::kPassive;
  } else {
    throw ParseError("unknown constraint kind '" + kind + "'");
  }
  return make_constraint(json_mat(field(j, "Qhat"), "Qhat"),
                         json_mat(field(j, "Shat"), "Shat"),
                         json_mat(field(j, "Rhat"), "Rhat"),
                         json_mat(field(j, "H"), "H"), k);
}

std::string constraint_to_json(const QuadConstraint& c) {
  json j;
  j["kind"] = std::string(to_string(c.kind));
  j["Qhat"] = mat_json(c.Qhat.mat());
  j["Shat"] = mat_json(c.Shat);
  j["Rhat"] = mat_json(c.Rhat.mat());
  j["H"] = mat_json(c.H);
  return j.dump(2) + "\n";
}

QuadConstraint read_constraint(const fs::path& path) {
  return constraint_from_json(read_text(path));
}

void write_constraint(const fs::path& path, const QuadConstraint& c) {
  write_text(path, constraint_to_json(c));
}

static Certificate certificate_from_json_impl(std::string_view text) {
  const json j = parse_json(text);
  Certificate c;
  c.method = method_from_string(field(j, "method").get<std::string>());
  c.K = json_mat(field(j, "K"), "K");
  if (j.contains("M") && !j.at("M").is_null()) c.M = json_mat(j.at("M"), "M");
  const Mat p = json_mat(field(j, "P"), "P");
  try {
    c.P = SymMat(p);
  } catch (const Error& e) {
    throw CertificateCorrupt(std::string("P: ") + e.what());
  }
  for (const auto& [name, val] : field(j, "raw").items()) {
    c.raw[name] = json_mat(val, name);
  }
  c.eps = field(j, "eps").get<double>();
  if (j.contains("solver_stats")) {
    const json& s = j.at("solver_stats");
    if (s.contains("status")) c.stats.status = status_from_string(s.at("status"));
    c.stats.iterations = s.value("iterations", 0);
    c.stats.runtime_s = s.value("runtime_s", 0.0);
    if (s.contains("achieved_margin")) {
      c.stats.achieved_margin = number_or_inf(s.at("achieved_margin"));
    }
    c.stats.message = s.value("message", std::string());
  }
  if (j.contains("L") && !j.at("L").is_null()) c.L = json_mat(j.at("L"), "L");
  if (j.contains("decay_rho") && !j.at("decay_rho").is_null()) {
    c.decay_rho = j.at("decay_rho").get<double>();
  }
  return c;
}

std::string certificate_to_json(const Certificate& cert) {
  json j;
  j["method"] = std::string(to_string(cert.method));
  j["K"] = mat_json(cert.K);
  if (cert.M) j["M"] = mat_json(*cert.M);
  j["P"] = mat_json(cert.P.mat());
  json raw = json::object();
  for (const auto& [name, m] : cert.raw) raw[name] = mat_json(m);
  j["raw"] = raw;
  j["eps"] = cert.eps;
  j["solver_stats"] = {{"status", std::string(to_string(cert.stats.status))},
                       {"iterations", cert.stats.iterations},
                       {"runtime_s", cert.stats.runtime_s},
                       {"achieved_margin", number_or_null(cert.stats.achieved_margin)},
                       {"message", cert.stats.message}};
  if (cert.L) j["L"] = mat_json(*cert.L);
  if (cert.decay_rho) j["decay_rho"] = *cert.decay_rho;
  return j.dump(2) + "\n";
}

Certificate read_certificate(const fs::path& path) {
  return certificate_from_json(read_text(path));
}

void write_certificate(const fs::path& path, const Certificate& cert) {
  write_text(path, certificate_to_json(cert));
}

namespace {

json check_json(const CheckResult& c) {
  return {{"name", c.name},
          {"residual", number_or_null(c.residual)},
          {"tolerance", number_or_null(c.tolerance)},
          {"pass", c.pass},
          {"inconclusive", c.inconclusive},
          {"details", c.details}};
}

CheckResult json_check(const json& j) {
  CheckResult c;
  c.name = field(j, "name").get<std::string>();
  c.residual = number_or_inf(field(j, "residual"));
  c.tolerance = number_or_inf(field(j, "tolerance"));
  c.pass = field(j, "pass").get<bool>();
  c.inconclusive = j.value("inconclusive", false);
  c.details = j.value("details", std::string());
  return c;
}

}  // namespace

std::string report_to_json(const VerificationReport& rep) {
  json j;
  j["checks"] = json::array();
  for (const auto& c : rep.checks) j["checks"].push_back(check_json(c));
  j["overall"] = rep.overall;
  j["informational"] = json::array();
  for (const auto& c : rep.informational) j["informational"].push_back(check_json(c));
  return j.dump(2) + "\n";
}

static VerificationReport report_from_json_impl(std::string_view text) {
  const json j = parse_json(text);
  VerificationReport rep;
  for (const auto& c : field(j, "checks")) rep.checks.push_back(json_check(c));
  rep.overall = field(j, "overall").get<bool>();
  if (j.contains("informational")) {
    for (const auto& c : j.at("informational")) {
      rep.informational.push_back(json_check(c));
    }
  }
  return rep;
}

PlantModel model_from_json(std::string_view text) {
  return guarded([&] { return model_from_json_impl(text); });
}

QuadConstraint constraint_from_json(std::string_view text) {
  return guarded([&] { return constraint_from_json_impl(text); });
}

Certificate certificate_from_json(std::string_view text) {
  return guarded([&] { return certificate_from_json_impl(text); });
}

VerificationReport report_from_json(std::string_view text) {
  return guarded([&] { return report_from_json_impl(text); });
}

}  // namespace ddlure
