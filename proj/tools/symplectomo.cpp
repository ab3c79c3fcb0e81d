// symplectomo command-line tool: states, tomograms, sampling campaigns,
// reconstruction, comparison and plot-ready Wigner grids.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "symplectomo.hpp"

namespace sp = symplectomo;
using json = nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

int exit_code(sp::ErrorKind kind) {
  switch (kind) {
    case sp::ErrorKind::GridTooNarrow:
    case sp::ErrorKind::CutoffTooSmall:
    case sp::ErrorKind::GridUnderresolved:
    case sp::ErrorKind::TruncationTooSmall:
      return kExitNumerical;
    case sp::ErrorKind::Io:
      return kExitIo;
    default:
      return kExitUsage;
  }
}

[[noreturn]] void parse_fail(const std::string& what) { throw sp::Error(sp::ErrorKind::Parse, what); }

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double to_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    parse_fail("not a number: '" + s + "'");
  }
  if (used != s.size() || !std::isfinite(v)) parse_fail("not a number: '" + s + "'");
  return v;
}

std::size_t to_count(const std::string& s) {
  const double v = to_double(s);
  if (v < 0.0 || v != std::floor(v)) parse_fail("not a count: '" + s + "'");
  return static_cast<std::size_t>(v);
}

// "name:k=v,k=v" with every key required exactly once.
class KeyValues {
 public:
  KeyValues(const std::string& body, const std::string& where) : where_(where) {
    if (body.empty()) return;
    for (const auto& item : split(body, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) parse_fail(where + ": expected key=value, got '" + item + "'");
      const auto key = item.substr(0, eq);
      if (!values_.emplace(key, item.substr(eq + 1)).second) parse_fail(where + ": duplicate key '" + key + "'");
    }
  }

  std::string text(const std::string& key) {
    const auto it = values_.find(key);
    if (it == values_.end()) parse_fail(where_ + ": missing '" + key + "'");
    used_.push_back(key);
    return it->second;
  }
  double number(const std::string& key) { return to_double(text(key)); }
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  void finish() const {
    for (const auto& [k, v] : values_) {
      if (std::find(used_.begin(), used_.end(), k) == used_.end()) parse_fail(where_ + ": unknown key '" + k + "'");
    }
  }

 private:
  std::string where_;
  std::map<std::string, std::string> values_;
  std::vector<std::string> used_;
};

std::pair<std::string, std::string> head_body(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) return {spec, ""};
  return {spec.substr(0, colon), spec.substr(colon + 1)};
}

// ---------------------------------------------------------------------------
// States

bool is_two_mode_spec(const std::string& spec) {
  const auto head = head_body(spec).first;
  return head == "gauss2" || head == "cat2" || spec.rfind("product", 0) == 0;
}

sp::OneModeState parse_one_mode(const std::string& spec) {
  const auto [head, body] = head_body(spec);
  KeyValues kv(body, head);
  sp::OneModeState out;
  if (head == "vacuum") {
    out = sp::Vacuum{};
  } else if (head == "fock" || head == "number") {
    out = sp::NumberState{static_cast<unsigned>(to_count(kv.text("n")))};
  } else if (head == "coherent") {
    out = sp::Coherent{{kv.number("re"), kv.number("im")}};
  } else if (head == "cat") {
    out = sp::EvenCat{kv.number("a"), kv.number("b")};
  } else if (head == "pair") {
    out = sp::CoherentPair{{kv.number("re1"), kv.number("im1")}, {kv.number("re2"), kv.number("im2")}};
  } else if (head == "thermal") {
    out = sp::Thermal{kv.number("lambda")};
  } else {
    parse_fail("unknown one-mode state '" + head + "'");
  }
  kv.finish();
  sp::validate(out);
  return out;
}

sp::TwoModeState parse_two_mode(const std::string& spec) {
  if (spec.rfind("product", 0) == 0) {
    std::string inner = spec.substr(7);
    if (inner.size() >= 2 && inner.front() == '(' && inner.back() == ')') {
      inner = inner.substr(1, inner.size() - 2);
    } else if (!inner.empty() && inner.front() == ':') {
      inner = inner.substr(1);
    } else {
      parse_fail("product expects product(X|Y)");
    }
    const auto parts = split(inner, '|');
    if (parts.size() != 2) parse_fail("product expects exactly two factors");
    return sp::Product{parse_one_mode(parts[0]), parse_one_mode(parts[1])};
  }
  const auto [head, body] = head_body(spec);
  KeyValues kv(body, head);
  if (head == "gauss2") {
    const auto m = split(kv.text("M"), ';');
    if (m.size() != 10) parse_fail("gauss2: M needs the 10 upper-triangle entries");
    std::array<double, 10> u{};
    for (std::size_t i = 0; i < 10; ++i) u[i] = to_double(m[i]);
    sp::Gaussian2 g{sp::CovarianceMatrix::from_upper(u), sp::Vector4::Zero()};
    if (kv.has("means")) {
      const auto d = split(kv.text("means"), ';');
      if (d.size() != 4) parse_fail("gauss2: means needs 4 entries (q1;q2;p1;p2)");
      for (int i = 0; i < 4; ++i) g.means(i) = to_double(d[static_cast<std::size_t>(i)]);
    }
    kv.finish();
    return g;
  }
  if (head == "cat2") {
    sp::TwoModeCat c{{sp::Complex(kv.number("re1"), kv.number("im1")), sp::Complex(kv.number("re2"), kv.number("im2"))}};
    const auto parity = kv.text("parity");
    if (parity == "plus") {
      c.parity = sp::Parity::Plus;
    } else if (parity == "minus") {
      c.parity = sp::Parity::Minus;
    } else {
      parse_fail("cat2: parity must be plus or minus");
    }
    kv.finish();
    sp::two_mode_cat_normalization(c);
    return c;
  }
  parse_fail("unknown two-mode state '" + head + "'");
}

// ---------------------------------------------------------------------------
// Settings, grids, schemes

sp::UniformGrid parse_grid(const std::string& spec) {
  const auto p = split(spec, ':');
  if (p.size() != 3) parse_fail("grid must be lo:hi:n, got '" + spec + "'");
  sp::UniformGrid g{to_double(p[0]), to_double(p[1]), to_count(p[2])};
  g.validate();
  return g;
}

std::vector<double> numbers(const std::string& s, char sep) {
  std::vector<double> out;
  for (const auto& t : split(s, sep)) out.push_back(to_double(t));
  return out;
}

sp::Schedule parse_one_mode_schedule(const std::string& spec) {
  const auto [head, body] = head_body(spec);
  if (head == "circle") return sp::CircleSchedule{to_count(body)};
  if (head == "random") return sp::RandomSchedule{to_count(body)};
  std::vector<sp::QuadratureSetting> list;
  for (const auto& item : split(spec, ';')) {
    const auto v = numbers(item, ',');
    if (v.size() != 2 && v.size() != 3) parse_fail("one-mode setting is mu,nu[,delta], got '" + item + "'");
    sp::QuadratureSetting s{v[0], v[1], v.size() == 3 ? v[2] : 0.0};
    s.validate();
    list.push_back(s);
  }
  return list;
}

std::vector<sp::TwoModeSetting> parse_two_mode_settings(const std::string& spec, sp::TwoModeKind kind, const sp::Vec2& z) {
  const auto [head, body] = head_body(spec);
  if (head == "hopf") {
    const auto p = split(body, ':');
    if (p.size() != 2) parse_fail("hopf schedule is hopf:n_theta:n_phi");
    const sp::HopfLayout layout{to_count(p[0]), to_count(p[1])};
    if (layout.size() == 0) parse_fail("hopf schedule needs n_theta, n_phi >= 1");
    return kind == sp::TwoModeKind::Tilde ? sp::tilde_hopf_settings(layout) : sp::vector_hopf_settings(layout, z);
  }
  std::vector<sp::TwoModeSetting> out;
  for (const auto& item : split(spec, ';')) {
    const auto v = numbers(item, ',');
    if (v.size() != 4 && v.size() != 8) parse_fail("two-mode setting is mu1,mu2,nu1,nu2[,mup1,mup2,nup1,nup2]");
    sp::TwoModeSetting s;
    s.mu = {v[0], v[1]};
    s.nu = {v[2], v[3]};
    if (v.size() == 8) {
      s.mu_p = {v[4], v[5]};
      s.nu_p = {v[6], v[7]};
    } else if (kind == sp::TwoModeKind::Vector) {
      s = sp::complete_setting(s);
    }
    s.validate_tilde();
    out.push_back(s);
  }
  return out;
}

sp::Vec2 parse_z2(const std::string& spec) {
  const auto v = numbers(spec, ',');
  if (v.size() != 2) parse_fail("two-mode --z is z1,z2");
  return {v[0], v[1]};
}

sp::TwoModeKind parse_kind(const std::string& s) {
  if (s == "tilde") return sp::TwoModeKind::Tilde;
  if (s == "vector") return sp::TwoModeKind::Vector;
  parse_fail("--kind must be tilde or vector");
}

// ---------------------------------------------------------------------------
// Files and manifests

void write_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw sp::Error(sp::ErrorKind::Io, "cannot write '" + path + "'");
  os << text;
  if (!os) throw sp::Error(sp::ErrorKind::Io, "write failed for '" + path + "'");
}

struct Manifest {
  std::string command;
  json params = json::object();
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::optional<std::uint64_t> seed;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void write(const std::string& out_path) const {
    json j;
    j["command"] = command;
    j["params"] = params;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    j["seed"] = seed ? json(*seed) : json(nullptr);
    j["version"] = sp::kVersion;
    j["threads"] = sp::thread_count();
    j["duration_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_file(out_path + ".manifest.json", j.dump(2) + "\n");
  }
};

void record_params(const CLI::App& app, Manifest& m) {
  for (const auto* opt : app.get_options()) {
    if (opt->get_name() == "--help" || opt->count() == 0) continue;
    const auto& r = opt->results();
    m.params[opt->get_name()] = r.size() == 1 ? json(r.front()) : json(r);
  }
}

sp::FockDensityMatrix read_density_json(const std::string& path) {
  const std::string text = sp::read_text_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    parse_fail(path + ": " + e.what());
  }
  if (!j.contains("dim") || !j.contains("re") || !j.contains("im")) parse_fail(path + ": density JSON needs dim, re, im");
  const auto dim = j["dim"].get<std::size_t>();
  sp::ComplexMatrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  const auto& re = j["re"];
  const auto& im = j["im"];
  if (re.size() != dim || im.size() != dim) parse_fail(path + ": matrix size does not match dim");
  for (std::size_t a = 0; a < dim; ++a) {
    if (re[a].size() != dim || im[a].size() != dim) parse_fail(path + ": ragged matrix");
    for (std::size_t b = 0; b < dim; ++b) {
      m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = {re[a][b].get<double>(), im[a][b].get<double>()};
    }
  }
  std::vector<std::size_t> dims;
  if (j.contains("dims")) dims = j["dims"].get<std::vector<std::size_t>>();
  return sp::FockDensityMatrix(m, dims);
}

enum class InputKind { Tomogram, Samples, TwoModeTomogram, TwoModeSamples };

InputKind classify(const sp::NumericTable& t) {
  switch (t.header.size()) {
    case 5: return InputKind::Tomogram;
    case 4: return InputKind::Samples;
    case 10:
    case 11: return InputKind::TwoModeTomogram;
    case 9: return InputKind::TwoModeSamples;
    default: parse_fail("unrecognized CSV header");
  }
}

// ---------------------------------------------------------------------------
// Commands

struct Options {
  std::string state, settings, x, kind = "tilde", scheme, z, grid, projection = "hermitize", method = "symplectic";
  std::string input, out, a, b, q = "-4:4:81", p = "-4:4:81", dims;
  std::size_t n = 0, dim = 40;
  std::uint64_t seed = 0;
};

int cmd_density(const Options& o, Manifest& m) {
  std::string text;
  if (is_two_mode_spec(o.state)) {
    const auto st = parse_two_mode(o.state);
    std::size_t d1 = o.dim, d2 = o.dim;
    if (!o.dims.empty()) {
      const auto v = split(o.dims, ',');
      if (v.size() != 2) parse_fail("--dims is d1,d2");
      d1 = to_count(v[0]);
      d2 = to_count(v[1]);
    }
    text = "{" + sp::density_json_fields(sp::density_matrix_two_mode(st, d1, d2)) + "}\n";
  } else {
    text = "{" + sp::density_json_fields(sp::density_matrix(parse_one_mode(o.state), o.dim)) + "}\n";
  }
  write_file(o.out, text);
  m.outputs.push_back(o.out);
  std::cout << "wrote " << o.out << "\n";
  return kExitOk;
}

int cmd_tomogram(const Options& o, Manifest& m) {
  if (is_two_mode_spec(o.state)) {
    const auto st = parse_two_mode(o.state);
    const auto kind = parse_kind(o.kind);
    const sp::Vec2 z = o.z.empty() ? sp::Vec2{1.0, 1.0} : parse_z2(o.z);
    const auto settings = parse_two_mode_settings(o.settings.empty() ? "hopf:16:24" : o.settings, kind, z);
    sp::TwoModeTomogram t;
    if (kind == sp::TwoModeKind::Tilde) {
      t = o.x.empty() ? sp::tabulate_tilde_tomogram(st, settings) : sp::tabulate_tilde_tomogram(st, settings, parse_grid(o.x));
    } else {
      const auto g = sp::default_vector_grids(st, settings);
      const auto g1 = o.x.empty() ? g.first : parse_grid(o.x);
      const auto g2 = o.x.empty() ? g.second : parse_grid(o.x);
      t = sp::tabulate_vector_tomogram(st, settings, g1, g2);
    }
    write_file(o.out, sp::two_mode_tomogram_csv(t));
    std::cout << "rows " << t.settings.size() << " x " << t.points_per_row() << ", max normalization error "
              << sp::format_double(t.max_normalization_error()) << "\n";
  } else {
    const auto st = parse_one_mode(o.state);
    const auto settings = sp::expand_schedule(parse_one_mode_schedule(o.settings.empty() ? "circle:32" : o.settings), o.seed);
    const auto t = o.x.empty() ? sp::tabulate_tomogram(st, settings) : sp::tabulate_tomogram(st, settings, parse_grid(o.x));
    write_file(o.out, sp::tomogram_csv(t));
    const auto h = sp::trapezoid_weights(t.x_grid);
    double worst = 0.0;
    for (Eigen::Index k = 0; k < t.values.rows(); ++k) {
      double acc = 0.0;
      for (std::size_t i = 0; i < t.x_grid.n; ++i) acc += h[i] * t.values(k, static_cast<Eigen::Index>(i));
      worst = std::max(worst, std::abs(acc - 1.0));
    }
    std::cout << "rows " << t.settings.size() << " x " << t.x_grid.n << ", max normalization error "
              << sp::format_double(worst) << "\n";
  }
  m.outputs.push_back(o.out);
  return kExitOk;
}

int cmd_sample(const Options& o, Manifest& m) {
  if (o.n == 0) parse_fail("--n must be >= 1");
  m.seed = o.seed;
  std::vector<sp::SampleBatch> batches;
  std::string state_desc;
  const bool two = is_two_mode_spec(o.state);
  if (!o.scheme.empty() && !o.settings.empty()) parse_fail("give either --scheme or --settings");
  if (o.scheme.empty() && o.settings.empty()) parse_fail("one of --scheme or --settings is required");
  if (two) {
    const auto st = parse_two_mode(o.state);
    state_desc = sp::describe(st);
    std::vector<sp::TwoModeSetting> settings;
    if (!o.scheme.empty()) {
      const auto [head, body] = head_body(o.scheme);
      KeyValues kv(body, head);
      if (head != "heterodyne") parse_fail("two-mode states take the heterodyne scheme or --settings");
      settings.push_back(sp::heterodyne_to_setting(
          {kv.number("E1"), kv.number("E2"), kv.number("phi"), kv.number("th1"), kv.number("th2")}));
      kv.finish();
    } else {
      settings = parse_two_mode_settings(o.settings, sp::TwoModeKind::Tilde, {1.0, 0.0});
    }
    batches = sp::sample_campaign(st, settings, o.n, o.seed);
  } else {
    const auto st = parse_one_mode(o.state);
    state_desc = sp::describe(st);
    sp::Schedule schedule;
    if (!o.scheme.empty()) {
      const auto [head, body] = head_body(o.scheme);
      KeyValues kv(body, head);
      sp::QuadratureSetting s;
      if (head == "direct") {
        s = {kv.number("mu"), kv.number("nu"), kv.has("delta") ? kv.number("delta") : 0.0};
      } else if (head == "squeezer") {
        s = sp::squeezer_to_setting({kv.number("s"), kv.number("theta"), true});
      } else if (head == "heterodyne") {
        parse_fail("the heterodyne scheme needs a two-mode state");
      } else {
        parse_fail("unknown scheme '" + head + "'");
      }
      kv.finish();
      schedule = std::vector<sp::QuadratureSetting>{s};
    } else {
      schedule = parse_one_mode_schedule(o.settings);
    }
    batches = sp::sample_campaign(st, schedule, o.n, o.seed);
  }
  write_file(o.out, sp::samples_csv(batches));
  json meta;
  meta["seed"] = o.seed;
  meta["generator"] = sp::kGeneratorName;
  meta["state"] = state_desc;
  meta["settings"] = batches.size();
  meta["samples_per_setting"] = o.n;
  json seeds = json::array();
  for (const auto& b : batches) seeds.push_back(b.seed);
  meta["batch_seeds"] = seeds;
  write_file(o.out + ".meta.json", meta.dump(2) + "\n");
  m.outputs.push_back(o.out);
  m.outputs.push_back(o.out + ".meta.json");
  std::cout << "wrote " << batches.size() << " batch(es) of " << o.n << " samples to " << o.out << "\n";
  return kExitOk;
}

void apply_grid(const std::string& spec, double& r_max, std::size_t& n_r, std::size_t* n_phi) {
  const auto p = split(spec, ':');
  if (p.size() < 2 || p.size() > 3) parse_fail("--grid is r_max:n_r[:n_phi]");
  r_max = to_double(p[0]);
  n_r = to_count(p[1]);
  if (p.size() == 3) {
    if (!n_phi) parse_fail("--grid takes no n_phi for this input");
    *n_phi = to_count(p[2]);
  }
}

int cmd_reconstruct(const Options& o, Manifest& m) {
  m.inputs.push_back(o.input);
  const auto table = sp::read_csv(o.input);
  const auto kind = classify(table);
  sp::ReconstructionReport rep;
  if (kind == InputKind::TwoModeSamples) {
    throw sp::Error(sp::ErrorKind::UnsupportedVariant, "two-mode reconstruction takes a tabulated tomogram");
  }
  if (kind == InputKind::TwoModeTomogram) {
    const auto t = sp::two_mode_tomogram_from_table(table);
    sp::TwoModeReconstructionConfig cfg;
    if (!o.z.empty()) cfg.z = parse_z2(o.z);
    cfg.dims = {o.dim, o.dim};
    if (!o.dims.empty()) {
      const auto v = split(o.dims, ',');
      if (v.size() != 2) parse_fail("--dims is d1,d2");
      cfg.dims = {to_count(v[0]), to_count(v[1])};
    } else if (o.dim == 40) {
      cfg.dims = {12, 12};
    }
    if (!o.grid.empty()) apply_grid(o.grid, cfg.r_max, cfg.n_r, nullptr);
    cfg.projection = sp::parse_projection(o.projection);
    rep = sp::reconstruct_two_mode(t, cfg);
  } else {
    sp::ReconstructionConfig cfg;
    if (!o.z.empty()) cfg.scale.z = to_double(o.z);
    cfg.dim = o.dim;
    cfg.projection = sp::parse_projection(o.projection);
    if (!o.grid.empty()) {
      double r = 0.0;
      apply_grid(o.grid, r, cfg.n_r, &cfg.n_phi);
      cfg.r_max = r;
    }
    if (o.method == "homodyne") {
      const double cutoff = o.grid.empty() ? 12.0 : *cfg.r_max;
      rep = kind == InputKind::Tomogram ? sp::reconstruct_homodyne(sp::tomogram_from_table(table), o.dim, cutoff)
                                        : sp::reconstruct_homodyne(sp::samples_from_table(table), o.dim, cutoff);
      if (cfg.projection != sp::Projection::Hermitize) rep = sp::finish_report(rep.raw, cfg.projection);
    } else if (o.method == "symplectic") {
      rep = kind == InputKind::Tomogram ? sp::reconstruct_from_tomogram(sp::tomogram_from_table(table), cfg)
                                        : sp::reconstruct_from_samples(sp::samples_from_table(table), cfg);
    } else {
      parse_fail("--method must be symplectic or homodyne");
    }
  }
  write_file(o.out, rep.to_json());
  m.outputs.push_back(o.out);
  std::cout << "trace error " << sp::format_double(rep.trace_error) << ", min eigenvalue "
            << sp::format_double(rep.min_eigenvalue) << ", wrote " << o.out << "\n";
  return kExitOk;
}

int cmd_compare(const Options& o, Manifest& m) {
  m.inputs = {o.a, o.b};
  const auto ra = read_density_json(o.a);
  const auto rb = read_density_json(o.b);
  json r;
  r["fidelity"] = sp::fidelity(ra, rb);
  r["trace_distance"] = sp::trace_distance(ra, rb);
  r["max_abs_deviation"] = sp::max_abs_deviation(ra, rb);
  const std::string text = r.dump(2) + "\n";
  std::cout << text;
  if (!o.out.empty()) {
    write_file(o.out, text);
    m.outputs.push_back(o.out);
  }
  return kExitOk;
}

int cmd_wigner(const Options& o, Manifest& m) {
  const auto gq = parse_grid(o.q), gp = parse_grid(o.p);
  std::function<double(double, double)> w;
  std::optional<sp::Tomogram> tomo;
  sp::ReconstructionConfig cfg;
  if (!o.state.empty() && !o.input.empty()) parse_fail("give either --state or --input");
  if (!o.state.empty()) {
    const auto st = parse_one_mode(o.state);
    w = [st](double q, double p) { return sp::wigner(st, q, p); };
  } else if (!o.input.empty()) {
    m.inputs.push_back(o.input);
    tomo = sp::read_tomogram_csv(o.input);
    if (!o.z.empty()) cfg.scale.z = to_double(o.z);
    w = [&](double q, double p) { return sp::wigner_from_tomogram(*tomo, q, p, cfg); };
  } else {
    parse_fail("one of --state or --input is required");
  }
  std::ostringstream os;
  os << "q,p,w\n";
  for (std::size_t i = 0; i < gq.n; ++i) {
    for (std::size_t j = 0; j < gp.n; ++j) {
      const double q = gq.at(i), p = gp.at(j);
      os << sp::format_double(q) << ',' << sp::format_double(p) << ',' << sp::format_double(w(q, p)) << '\n';
    }
  }
  write_file(o.out, os.str());
  m.outputs.push_back(o.out);
  std::cout << "wrote " << gq.n * gp.n << " points to " << o.out << "\n";
  return kExitOk;
}

// CLI11 reads "-6:6:601" after an option as a flag; glue such values on.
std::vector<std::string> normalize_args(int argc, char** argv) {
  static const std::vector<std::string> ranged{"--x", "--q", "--p", "--settings", "--z", "--scheme"};
  std::vector<std::string> out;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (i + 1 < argc && std::find(ranged.begin(), ranged.end(), a) != ranged.end() && argv[i + 1][0] == '-') {
      out.push_back(a + "=" + argv[i + 1]);
      ++i;
    } else {
      out.push_back(a);
    }
  }
  std::reverse(out.begin(), out.end());
  return out;
}

constexpr const char* kStateHelp =
    "vacuum | fock:n=N | coherent:re=,im= | cat:a=,b= | pair:re1=,im1=,re2=,im2= | thermal:lambda= | "
    "gauss2:M=m11;m12;m13;m14;m22;m23;m24;m33;m34;m44[,means=q1;q2;p1;p2] | "
    "cat2:re1=,im1=,re2=,im2=,parity=plus|minus | product(X|Y)";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symplectic quantum tomography toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", sp::kVersion);
  unsigned threads = 0;
  app.add_option("--threads", threads, "Cap on worker threads (also SYMPLECTOMO_THREADS)");

  Options o;
  auto* density = app.add_subcommand("density", "Write the number-basis density matrix of a state as JSON");
  density->add_option("--state", o.state, kStateHelp)->required();
  density->add_option("--dim", o.dim, "Fock truncation");
  density->add_option("--dims", o.dims, "Two-mode truncations d1,d2");
  density->add_option("--out", o.out, "Output JSON")->required();

  auto* tomogram = app.add_subcommand("tomogram", "Tabulate the exact tomogram of a state");
  tomogram->add_option("--state", o.state, kStateHelp)->required();
  tomogram->add_option("--settings", o.settings,
                       "circle:N | random:N | mu,nu[,delta];... (one mode); hopf:NT:NPHI | mu1,mu2,nu1,nu2;... (two modes)");
  tomogram->add_option("--x", o.x, "x grid lo:hi:n (default: state-dependent)");
  tomogram->add_option("--kind", o.kind, "two-mode tomogram kind: tilde | vector");
  tomogram->add_option("--z", o.z, "z1,z2 for vector hopf schedules");
  tomogram->add_option("--seed", o.seed, "Seed for random:N schedules");
  tomogram->add_option("--out", o.out, "Output CSV")->required();

  auto* sample = app.add_subcommand("sample", "Simulate measurement outcomes");
  sample->add_option("--state", o.state, kStateHelp)->required();
  sample->add_option("--scheme", o.scheme,
                     "direct:mu=,nu=[,delta=] | squeezer:s=,theta= | heterodyne:E1=,E2=,phi=,th1=,th2=");
  sample->add_option("--settings", o.settings, "campaign schedule (as for tomogram)");
  sample->add_option("--n", o.n, "Samples per setting")->required();
  sample->add_option("--seed", o.seed, "Master seed");
  sample->add_option("--out", o.out, "Output CSV")->required();

  auto* recon = app.add_subcommand("reconstruct", "Reconstruct a density matrix from a tomogram or samples CSV");
  recon->add_option("--input", o.input, "Tomogram or samples CSV")->required();
  recon->add_option("--z", o.z, "Kernel scale z (two modes: z1,z2)");
  recon->add_option("--dim", o.dim, "Fock truncation");
  recon->add_option("--dims", o.dims, "Two-mode truncations d1,d2");
  recon->add_option("--grid", o.grid, "r_max:n_r[:n_phi]");
  recon->add_option("--projection", o.projection, "none | hermitize | hermitize_and_clip");
  recon->add_option("--method", o.method, "symplectic | homodyne");
  recon->add_option("--out", o.out, "Output JSON")->required();

  auto* compare = app.add_subcommand("compare", "Fidelity, trace distance and max deviation of two density JSON files");
  compare->add_option("a", o.a, "First density JSON")->required();
  compare->add_option("b", o.b, "Second density JSON")->required();
  compare->add_option("--out", o.out, "Also write the report here");

  auto* wig = app.add_subcommand("wigner", "Wigner function on a q,p grid as CSV");
  wig->add_option("--state", o.state, kStateHelp);
  wig->add_option("--input", o.input, "One-mode tomogram CSV");
  wig->add_option("--z", o.z, "Kernel scale for tomogram input");
  wig->add_option("--q", o.q, "q grid lo:hi:n");
  wig->add_option("--p", o.p, "p grid lo:hi:n");
  wig->add_option("--out", o.out, "Output CSV")->required();

  try {
    auto args = normalize_args(argc, argv);
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }
  if (threads > 0) sp::set_thread_count(threads);

  const std::vector<std::pair<CLI::App*, int (*)(const Options&, Manifest&)>> table{
      {density, cmd_density}, {tomogram, cmd_tomogram}, {sample, cmd_sample},
      {recon, cmd_reconstruct}, {compare, cmd_compare}, {wig, cmd_wigner}};
  for (const auto& [sub, fn] : table) {
    if (!sub->parsed()) continue;
    Manifest m;
    m.command = sub->get_name();
    record_params(*sub, m);
    try {
      const int rc = fn(o, m);
      if (!o.out.empty()) m.write(o.out);
      return rc;
    } catch (const sp::Error& e) {
      std::cerr << "error [" << sp::to_string(e.kind()) << "]: " << e.what() << "\n";
      return exit_code(e.kind());
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitUsage;
    }
  }
  return kExitUsage;
}
