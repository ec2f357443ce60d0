#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "pv5/errors.hpp"
#include "pv5/lax.hpp"
#include "pv5/pv_core.hpp"
#include "pv5/specialfn.hpp"
#include "pv5/uniform_asym.hpp"

namespace pv5::cli {

using ojson = nlohmann::ordered_json;

namespace {

constexpr double kSigmaTol = 2e-2;
constexpr double kRTol = 2e-2;
constexpr double kProductTol = 5e-2;
constexpr double kIsomonodromyTol = 1e-2;

ojson cjson(Complex z) { return ojson{{"re", z.real()}, {"im", z.imag()}}; }

double parse_double(const std::string& key, const std::string& s) {
  std::size_t pos = 0;
  double x = 0.0;
  try {
    x = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad number for " + key + ": " + s);
  }
  if (pos != s.size()) throw std::invalid_argument("bad number for " + key + ": " + s);
  return x;
}

std::vector<double> parse_list(const std::string& key, const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(parse_double(key, item));
  }
  return out;
}

Format parse_format(const std::string& s) {
  if (s == "json") return Format::json;
  if (s == "csv") return Format::csv;
  if (s == "both") return Format::both;
  throw std::invalid_argument("format must be json, csv or both");
}

const char* format_name(Format f) {
  switch (f) {
    case Format::json: return "json";
    case Format::csv: return "csv";
    case Format::both: return "both";
  }
  return "both";
}

bool wants_json(Format f) { return f != Format::csv; }
bool wants_csv(Format f) { return f != Format::json; }

std::string iso_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << text;
}

// Hash over everything but the wall-clock section, which is appended afterwards.
std::string finish_record(ojson& rec, const std::string& started, double elapsed) {
  const std::string hash = content_hash(rec.dump());
  rec["content_hash"] = hash;
  rec["meta"] = ojson{{"started", started}, {"finished", iso_now()}, {"elapsed_s", elapsed}};
  return hash;
}

PVState large_t_seed(const RunConfig& cfg, double t) {
  const SeedInf seed{cfg.u_hat};
  if (cfg.seed_order == 0) return seed_at_infinity(t, seed);
  return seed_at_infinity_series(t, seed, 20.0, cfg.seed_order < 0 ? 14 : cfg.seed_order);
}

std::string seed_descriptor(const RunConfig& cfg) {
  std::ostringstream os;
  os << (cfg.seed_order == 0 ? "large-t leading order" : "large-t series") << " u_hat=" << num(cfg.u_hat.real())
     << (cfg.u_hat.imag() < 0 ? "" : "+") << num(cfg.u_hat.imag()) << "i t1=" << num(cfg.t1);
  if (cfg.seed_order > 0) os << " order=" << cfg.seed_order;
  return os.str();
}

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream os;
  os << "t,y_re,y_im,v_re,v_im,ln_u_re,ln_u_im,abs_y,arg_y\n";
  for (const PVState& s : traj.samples())
    os << num(s.t) << ',' << num(s.y.real()) << ',' << num(s.y.imag()) << ',' << num(s.v.real()) << ','
       << num(s.v.imag()) << ',' << num(s.ln_u.real()) << ',' << num(s.ln_u.imag()) << ',' << num(std::abs(s.y))
       << ',' << num(std::arg(s.y)) << '\n';
  return os.str();
}

std::string stokes_csv(const std::vector<StokesData>& data) {
  std::ostringstream os;
  os << "t,R,gauge,s1_re,s1_im,s2_re,s2_im,structure_s1,structure_s2,det_drift,truncation_estimate\n";
  for (const StokesData& d : data)
    os << num(d.t_used) << ',' << num(d.R) << ',' << to_string(d.gauge) << ',' << num(d.s1.real()) << ','
       << num(d.s1.imag()) << ',' << num(d.s2.real()) << ',' << num(d.s2.imag()) << ',' << num(d.structure_residual_s1)
       << ',' << num(d.structure_residual_s2) << ',' << num(d.det_drift) << ',' << num(d.truncation_estimate) << '\n';
  return os.str();
}

ojson stokes_json(const StokesData& d) {
  return ojson{{"t", d.t_used},
               {"R", d.R},
               {"gauge", to_string(d.gauge)},
               {"s1", cjson(d.s1)},
               {"s2", cjson(d.s2)},
               {"ray_angles", {d.ray_angles[0], d.ray_angles[1], d.ray_angles[2]}},
               {"structure_residual_s1", d.structure_residual_s1},
               {"structure_residual_s2", d.structure_residual_s2},
               {"det_drift", d.det_drift},
               {"truncation_estimate", d.truncation_estimate}};
}

struct Verdicts {
  ojson list = ojson::array();
  bool all_pass = true;

  void add(const std::string& name, double value, double tol) {
    const bool pass = value <= tol;
    all_pass = all_pass && pass;
    list.push_back(ojson{{"name", name}, {"value", value}, {"tolerance", tol}, {"pass", pass}});
  }
  void add_flag(const std::string& name, bool pass, const std::string& rule) {
    all_pass = all_pass && pass;
    list.push_back(ojson{{"name", name}, {"rule", rule}, {"pass", pass}});
  }
};

void print_verdicts(std::ostream& out, const Verdicts& v) {
  for (const auto& item : v.list) {
    out << (item["pass"].get<bool>() ? "PASS " : "FAIL ") << item["name"].get<std::string>();
    if (item.contains("value")) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "  %.3e (tol %.1e)", item["value"].get<double>(), item["tolerance"].get<double>());
      out << buf;
    } else {
      out << "  " << item["rule"].get<std::string>();
    }
    out << '\n';
  }
}

std::filesystem::path prepare_dir(const RunConfig& cfg) {
  std::filesystem::path dir(cfg.output_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

struct Timer {
  std::string started = iso_now();
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double elapsed() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); }
};

int cmd_verify(const RunConfig& cfg, std::ostream& out) {
  cfg.validate();
  Timer timer;
  const PVState seed = large_t_seed(cfg, cfg.t1);
  IntegrateOptions io;
  io.rtol = cfg.rtol;
  io.atol = cfg.atol;
  io.extra_times = cfg.t_scan;
  for (double t : {0.2, 0.1})
    if (t > cfg.t0 && t < cfg.t1) io.extra_times.push_back(t);
  Trajectory traj = integrate(seed, cfg.t0, io);
  traj.set_seed_descriptor(seed_descriptor(cfg));
  const PVState& end = traj.back();

  const ConnectionResult conn = connection_solve(cfg.u_hat);
  const Complex alpha = whittaker_alpha(end);
  const Complex r = extract_r(end);
  const Complex u_back = extract_u_hat(traj.state_at(std::max(cfg.t0, 0.5 * cfg.t1)));

  ojson sigma_path = ojson::array();
  for (double t : {0.2, 0.1, cfg.t0}) {
    if (t < cfg.t0 || t > cfg.t1) continue;
    const Complex a = whittaker_alpha(traj.state_at(t));
    sigma_path.push_back(ojson{{"t", t}, {"alpha", cjson(a)}, {"error", std::abs(a - conn.sigma)}});
  }

  const IsomonodromyReport iso = isomonodromy_scan(traj, cfg.t_scan, cfg.radius);

  Verdicts v;
  v.add("sigma", std::abs(alpha - conn.sigma), kSigmaTol);
  v.add("r", std::abs(r - conn.r), kRTol);
  for (const StokesData& d : iso.data) {
    const std::string at = "@t=" + num(d.t_used);
    v.add("s1s2_product" + at, std::abs(d.s1 * d.s2 - 4.0), kProductTol);
    v.add("s1" + at, std::abs(d.s1 - s1_large_t(cfg.u_hat)), kProductTol);
    v.add("s2" + at, std::abs(d.s2 - s2_large_t(cfg.u_hat)), kProductTol);
  }
  v.add("isomonodromy", std::max(iso.max_dev_s1, iso.max_dev_s2), kIsomonodromyTol);

  ojson rec;
  rec["schema"] = "pv5.runrecord/1";
  rec["command"] = "verify";
  rec["config"] = to_json(cfg);
  rec["trajectory_ref"] = wants_csv(cfg.format) ? "trajectory.csv" : "";
  rec["trajectory"] = ojson{{"seed", traj.seed_descriptor()},
                            {"samples", traj.samples().size()},
                            {"steps", traj.steps()},
                            {"chart_switches", traj.chart_switches().size()}};
  rec["stokes"] = ojson::array();
  for (const StokesData& d : iso.data) rec["stokes"].push_back(stokes_json(d));
  rec["extracted"] = ojson{{"sigma", cjson(alpha)},
                           {"r", cjson(r)},
                           {"u_hat_back", cjson(u_back)},
                           {"sigma_target", cjson(conn.sigma)},
                           {"r_target", cjson(conn.r)},
                           {"sigma_path", sigma_path}};
  rec["verdicts"] = v.list;
  rec["all_pass"] = v.all_pass;
  const std::string hash = finish_record(rec, timer.started, timer.elapsed());

  const auto dir = prepare_dir(cfg);
  if (wants_json(cfg.format)) write_text(dir / "runrecord.json", rec.dump(2) + "\n");
  if (wants_csv(cfg.format)) {
    write_text(dir / "trajectory.csv", trajectory_csv(traj));
    write_text(dir / "stokes.csv", stokes_csv(iso.data));
  }
  print_verdicts(out, v);
  out << "hash " << hash << "\n";
  return v.all_pass ? kPass : kVerdictFail;
}

PVState parse_state(const std::string& s) {
  const std::vector<double> f = parse_list("state", s);
  if (f.size() != 7) throw std::invalid_argument("--state needs t,y_re,y_im,v_re,v_im,ln_u_re,ln_u_im");
  const PVState st = PVState::make_log(f[0], {f[1], f[2]}, {f[3], f[4]}, {f[5], f[6]});
  validate(st);
  return st;
}

Gauge parse_gauge(const std::string& s) {
  if (s == "original") return Gauge::original;
  if (s == "tilde") return Gauge::tilde;
  if (s == "hat") return Gauge::hat;
  throw std::invalid_argument("gauge must be original, tilde or hat");
}

int cmd_stokes(const RunConfig& cfg, const std::string& state_text, const std::string& gauge, std::ostream& out) {
  Timer timer;
  StokesOptions so;
  so.gauge = parse_gauge(gauge);
  std::vector<StokesData> data;
  if (!state_text.empty()) {
    if (cfg.radius != 0.0 && cfg.radius < 50.0) throw std::invalid_argument("radius must be >= 50");
    const PVState s = parse_state(state_text);
    data.push_back(stokes_multipliers(s, cfg.radius > 0 ? cfg.radius : r_min(s.t), so));
  } else {
    cfg.validate();
    IntegrateOptions io;
    io.rtol = cfg.rtol;
    io.atol = cfg.atol;
    io.extra_times = cfg.t_scan;
    const double lo = *std::min_element(cfg.t_scan.begin(), cfg.t_scan.end());
    const Trajectory traj = integrate(large_t_seed(cfg, cfg.t1), lo, io);
    data = isomonodromy_scan(traj, cfg.t_scan, cfg.radius, so).data;
  }
  ojson rec;
  rec["schema"] = "pv5.stokes/1";
  rec["command"] = "stokes";
  rec["config"] = to_json(cfg);
  rec["stokes"] = ojson::array();
  for (const StokesData& d : data) rec["stokes"].push_back(stokes_json(d));
  finish_record(rec, timer.started, timer.elapsed());
  const auto dir = prepare_dir(cfg);
  if (wants_json(cfg.format)) write_text(dir / "stokes.json", rec.dump(2) + "\n");
  if (wants_csv(cfg.format)) write_text(dir / "stokes.csv", stokes_csv(data));
  for (const StokesData& d : data) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "t=%g  s1=%.10f%+.10fi  s2=%.10f%+.10fi\n", d.t_used, d.s1.real(), d.s1.imag(),
                  d.s2.real(), d.s2.imag());
    out << buf;
  }
  return kPass;
}

int cmd_integrate(const RunConfig& cfg, std::ostream& out) {
  cfg.validate();
  Timer timer;
  IntegrateOptions io;
  io.rtol = cfg.rtol;
  io.atol = cfg.atol;
  io.extra_times = cfg.t_scan;
  Trajectory traj = integrate(large_t_seed(cfg, cfg.t1), cfg.t0, io);
  traj.set_seed_descriptor(seed_descriptor(cfg));
  ojson rec;
  rec["schema"] = "pv5.trajectory/1";
  rec["command"] = "integrate";
  rec["config"] = to_json(cfg);
  rec["seed"] = traj.seed_descriptor();
  rec["tolerances"] = ojson{{"rtol", traj.rtol()}, {"atol", traj.atol()}};
  rec["steps"] = traj.steps();
  ojson samples = ojson::array();
  for (const PVState& s : traj.samples())
    samples.push_back(ojson{{"t", s.t}, {"y", cjson(s.y)}, {"v", cjson(s.v)}, {"ln_u", cjson(s.ln_u)}});
  rec["samples"] = samples;
  finish_record(rec, timer.started, timer.elapsed());
  const auto dir = prepare_dir(cfg);
  if (wants_json(cfg.format)) write_text(dir / "trajectory.json", rec.dump(2) + "\n");
  if (wants_csv(cfg.format)) write_text(dir / "trajectory.csv", trajectory_csv(traj));
  const PVState& e = traj.back();
  char buf[200];
  std::snprintf(buf, sizeof buf, "samples=%zu steps=%ld end t=%g y=%.12g%+.12gi v=%.12g%+.12gi\n",
                traj.samples().size(), traj.steps(), e.t, e.y.real(), e.y.imag(), e.v.real(), e.v.imag());
  out << buf;
  return kPass;
}

struct SpecialfnArgs {
  std::string name;
  double z_re = 0.0, z_im = 0.0;
  std::optional<double> arg;
  double kappa_re = 0.5, kappa_im = 0.0, mu_re = 0.0, mu_im = 0.0;
};

int cmd_specialfn(const SpecialfnArgs& a, std::ostream& out) {
  const Complex z(a.z_re, a.z_im);
  const SectorArg zs = a.arg ? SectorArg::with_branch(z, *a.arg) : SectorArg(z);
  const Complex kappa(a.kappa_re, a.kappa_im), mu(a.mu_re, a.mu_im);
  Complex value;
  if (a.name == "gamma")
    value = gamma(z);
  else if (a.name == "rgamma")
    value = rgamma(z);
  else if (a.name == "K1")
    value = bessel_K1(zs);
  else if (a.name == "I1")
    value = bessel_I1(zs);
  else if (a.name == "M")
    value = whittaker_M(kappa, mu, zs);
  else if (a.name == "W")
    value = whittaker_W(kappa, mu, zs);
  else
    throw std::invalid_argument("unknown function " + a.name + " (gamma, rgamma, K1, I1, M, W)");
  ojson rec{{"name", a.name}, {"z", cjson(z)}, {"branch_arg", zs.branch_arg()}, {"value", cjson(value)}};
  if (a.name == "M" || a.name == "W") {
    rec["kappa"] = cjson(kappa);
    rec["mu"] = cjson(mu);
  }
  out << rec.dump() << "\n";
  return kPass;
}

struct CheckArgs {
  std::string which = "3.1";
  int samples = 200;
  bool scan_given = false;
};

int cmd_lemma_check(RunConfig cfg, const CheckArgs& la, std::ostream& out) {
  Timer timer;
  if (cfg.u_hat == 0.0) throw std::invalid_argument("u_hat must be nonzero");
  const bool small_t = la.which == "2.1";
  if (!small_t && la.which != "3.1" && la.which != "3.2") throw std::invalid_argument("lemma must be 2.1, 3.1 or 3.2");
  if (!la.scan_given) cfg.t_scan = small_t ? std::vector<double>{0.2, 0.1, 0.05} : std::vector<double>{20, 40, 80};
  if (cfg.t_scan.empty()) throw std::invalid_argument("t-scan is empty");
  ApproximantOptions ao;
  ao.samples = la.samples;

  std::vector<PVState> states;
  if (small_t) {
    const double lo = *std::min_element(cfg.t_scan.begin(), cfg.t_scan.end());
    const double hi = *std::max_element(cfg.t_scan.begin(), cfg.t_scan.end());
    if (lo <= 0.0 || hi >= cfg.t1) throw std::invalid_argument("t-scan must lie in (0, t1)");
    IntegrateOptions io;
    io.rtol = cfg.rtol;
    io.atol = cfg.atol;
    io.extra_times = cfg.t_scan;
    const Trajectory traj = integrate(large_t_seed(cfg, cfg.t1), lo, io);
    for (double t : cfg.t_scan) states.push_back(traj.state_at(t));
  } else {
    for (double t : cfg.t_scan) {
      if (t < 20.0) throw std::invalid_argument("large-t lemma checks need t >= 20");
      states.push_back(large_t_seed(cfg, t));
    }
  }
  const ScalarVariant variant =
      small_t ? ScalarVariant::direct : (la.which == "3.1" ? ScalarVariant::tilde : ScalarVariant::hat);
  // only the tilde gauge has a documented failure point (η = 1/2)
  const bool control = la.which == "3.1";

  struct Row {
    ApproximantReport main, control;
  };
  std::vector<std::future<Row>> jobs;
  for (const PVState& s : states) {
    jobs.push_back(std::async(std::launch::async, [&, s] {
      Row row;
      const auto ray = small_t ? eta_ray(kPi / 2, 1.0, 30.0) : eta_ray(kPi / 2, 5.0 * s.t, 50.0 * s.t);
      row.main = approximant_error(variant, s, ray, ao);
      if (control) row.control = approximant_error(variant, s, {Complex(0.5, 2.0), Complex(0.5, 0.01)}, ao);
      return row;
    }));
  }
  std::vector<Row> rows;
  for (auto& j : jobs) rows.push_back(j.get());

  // sorted so that "convergence" means decreasing error as the lemma's limit is approached
  std::vector<std::size_t> order(states.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return small_t ? states[a].t > states[b].t : states[a].t < states[b].t;
  });
  bool monotone = true;
  for (std::size_t k = 1; k < order.size(); ++k)
    monotone = monotone && rows[order[k]].main.max_rel_error < rows[order[k - 1]].main.max_rel_error;

  Verdicts v;
  v.add_flag("lemma_" + la.which + "_monotone", monotone,
             small_t ? "error strictly decreasing as t decreases" : "error strictly decreasing as t increases");
  ojson per_t = ojson::array();
  std::ostringstream csv;
  csv << "t,kind,eta_re,eta_im,numeric_re,numeric_im,model_re,model_im,rel_error\n";
  double control_min = 1e300;
  for (std::size_t i : order) {
    ojson e{{"t", states[i].t},
            {"max_rel_error", rows[i].main.max_rel_error},
            {"c1", cjson(rows[i].main.c1)},
            {"c2", cjson(rows[i].main.c2)}};
    if (control) {
      e["control_max_rel_error"] = rows[i].control.max_rel_error;
      control_min = std::min(control_min, rows[i].control.max_rel_error);
    }
    per_t.push_back(e);
    auto dump = [&](const ApproximantReport& rep, const char* kind) {
      for (const ApproximantSample& smp : rep.samples)
        csv << num(states[i].t) << ',' << kind << ',' << num(smp.eta.real()) << ',' << num(smp.eta.imag()) << ','
            << num(smp.numeric.real()) << ',' << num(smp.numeric.imag()) << ',' << num(smp.model.real()) << ','
            << num(smp.model.imag()) << ',' << num(smp.rel_error) << '\n';
    };
    dump(rows[i].main, "ray");
    if (control) dump(rows[i].control, "control");
  }
  if (control)
    v.add_flag("lemma_" + la.which + "_control_no_convergence", control_min >= 0.05,
               "error near the turning point stays >= 5e-2 for every t");

  ojson rec;
  rec["schema"] = "pv5.lemma/1";
  rec["command"] = "lemma-check";
  rec["lemma"] = la.which;
  rec["config"] = to_json(cfg);
  rec["variant"] = to_string(variant);
  rec["results"] = per_t;
  rec["verdicts"] = v.list;
  rec["all_pass"] = v.all_pass;
  finish_record(rec, timer.started, timer.elapsed());
  const auto dir = prepare_dir(cfg);
  if (wants_json(cfg.format)) write_text(dir / "lemma.json", rec.dump(2) + "\n");
  if (wants_csv(cfg.format)) write_text(dir / "lemma.csv", csv.str());
  for (const auto& e : per_t) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "t=%g  max_rel_error=%.3e", e["t"].get<double>(), e["max_rel_error"].get<double>());
    out << buf;
    if (e.contains("control_max_rel_error")) {
      std::snprintf(buf, sizeof buf, "  control=%.3e", e["control_max_rel_error"].get<double>());
      out << buf;
    }
    out << '\n';
  }
  print_verdicts(out, v);
  return v.all_pass ? kPass : kVerdictFail;
}

}  // namespace

void RunConfig::validate() const {
  if (!is_finite(u_hat) || u_hat == 0.0) throw std::invalid_argument("u_hat must be finite and nonzero");
  if (!(t0 > 0.0)) throw std::invalid_argument("t0 must be positive");
  if (!(t0 < t1)) throw std::invalid_argument("t0 must be smaller than t1");
  if (t1 < 20.0) throw std::invalid_argument("t1 must be >= 20 for the large-t seed");
  if (!(rtol > 0.0) || !(atol > 0.0)) throw std::invalid_argument("rtol and atol must be positive");
  if (radius != 0.0 && radius < 50.0) throw std::invalid_argument("radius must be >= 50 (or 0 for the R_min rule)");
  for (double t : t_scan)
    if (t < t0 || t > t1) throw std::invalid_argument("t-scan points must lie in [t0, t1]");
  if (seed_order < -1) throw std::invalid_argument("seed-order must be >= -1");
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot read config file " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line.erase(0, line.find_first_not_of(" \t\r"));
    line.erase(line.find_last_not_of(" \t\r") + 1);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    key.erase(key.find_last_not_of(" \t") + 1);
    value.erase(0, value.find_first_not_of(" \t"));
    std::replace(key.begin(), key.end(), '_', '-');
    kv[key] = value;
  }
  return kv;
}

void apply_config(RunConfig& cfg, const std::map<std::string, std::string>& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "u-hat-re")
      cfg.u_hat.real(parse_double(key, value));
    else if (key == "u-hat-im")
      cfg.u_hat.imag(parse_double(key, value));
    else if (key == "t0")
      cfg.t0 = parse_double(key, value);
    else if (key == "t1")
      cfg.t1 = parse_double(key, value);
    else if (key == "rtol")
      cfg.rtol = parse_double(key, value);
    else if (key == "atol")
      cfg.atol = parse_double(key, value);
    else if (key == "radius")
      cfg.radius = parse_double(key, value);
    else if (key == "t-scan")
      cfg.t_scan = parse_list(key, value);
    else if (key == "out")
      cfg.output_dir = value;
    else if (key == "format")
      cfg.format = parse_format(value);
    else if (key == "seed-order")
      cfg.seed_order = static_cast<int>(parse_double(key, value));
    else
      throw std::invalid_argument("unknown config key " + key);
  }
}

ojson to_json(const RunConfig& cfg) {
  return ojson{{"u_hat", cjson(cfg.u_hat)}, {"t0", cfg.t0},         {"t1", cfg.t1},
               {"rtol", cfg.rtol},          {"atol", cfg.atol},     {"radius_R", cfg.radius},
               {"t_scan", cfg.t_scan},      {"format", format_name(cfg.format)},
               {"seed_order", cfg.seed_order}};
}

std::string content_hash(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Special Painleve V: integration, Stokes multipliers and connection checks", "pv5"};
  app.require_subcommand(1);
  app.fallthrough();

  std::map<std::string, std::string> flags;
  auto flag = [&](const std::string& name, const std::string& help) {
    app.add_option_function<std::string>(
        "--" + name, [&flags, name](const std::string& v) { flags[name] = v; }, help);
  };
  flag("u-hat-re", "real part of the large-t constant");
  flag("u-hat-im", "imaginary part of the large-t constant");
  flag("t0", "small-t end of the run");
  flag("t1", "large-t seeding time");
  flag("rtol", "relative tolerance");
  flag("atol", "absolute tolerance");
  flag("radius", "contour radius R (0: R_min rule)");
  flag("t-scan", "comma-separated times for Stokes data");
  flag("out", "output directory (default $PV5_OUT_DIR or .)");
  flag("format", "json, csv or both");
  flag("seed-order", "large-t seed: -1 summed series, 0 leading order, k truncation order");
  std::string config_path;
  app.add_option("--config", config_path, "flat key = value file");

  auto* verify = app.add_subcommand("verify", "end-to-end connection check");
  auto* stokes = app.add_subcommand("stokes", "Stokes multipliers along a trajectory or at one state");
  std::string state_text, gauge = "original";
  stokes->add_option("--state", state_text, "t,y_re,y_im,v_re,v_im,ln_u_re,ln_u_im");
  stokes->add_option("--gauge", gauge, "original, tilde or hat");
  auto* integ = app.add_subcommand("integrate", "integrate the system from the large-t seed");
  auto* special = app.add_subcommand("specialfn", "evaluate a special function");
  SpecialfnArgs sa;
  special->add_option("name", sa.name, "gamma, rgamma, K1, I1, M, W")->required();
  special->add_option("--z-re", sa.z_re);
  special->add_option("--z-im", sa.z_im);
  special->add_option("--arg", sa.arg, "branch argument of z");
  special->add_option("--kappa-re", sa.kappa_re);
  special->add_option("--kappa-im", sa.kappa_im);
  special->add_option("--mu-re", sa.mu_re);
  special->add_option("--mu-im", sa.mu_im);
  auto* lemma = app.add_subcommand("lemma-check", "approximant convergence check (2.1, 3.1, 3.2)");
  CheckArgs la;
  lemma->add_option("--which", la.which, "2.1, 3.1 or 3.2");
  lemma->add_option("--samples", la.samples, "samples per ray");

  std::vector<std::string> args;
  for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kPass;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  }

  RunConfig cfg;
  try {
    if (const char* env = std::getenv("PV5_OUT_DIR"); env && *env) cfg.output_dir = env;
    if (!config_path.empty()) apply_config(cfg, read_config_file(config_path));
    apply_config(cfg, flags);
    la.scan_given = flags.count("t-scan") || (!config_path.empty() && read_config_file(config_path).count("t-scan"));
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (*verify) return cmd_verify(cfg, out);
    if (*stokes) return cmd_stokes(cfg, state_text, gauge, out);
    if (*integ) return cmd_integrate(cfg, out);
    if (*special) return cmd_specialfn(sa, out);
    if (*lemma) return cmd_lemma_check(cfg, la, out);
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "numerical failure (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return kNumericalFail;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFail;
  }
  return kUsage;
}

}  // namespace pv5::cli
