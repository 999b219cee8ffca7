#include "cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <json.hpp>
#include <memory>
#include <sstream>

#include "dimers/amoeba.hpp"
#include "dimers/correlations.hpp"
#include "dimers/equivalence.hpp"
#include "dimers/greens.hpp"
#include "dimers/parallel.hpp"
#include "dimers/sampler.hpp"
#include "dimers/spectral.hpp"
#include "dimers/torus_kernels.hpp"
#include "dimers/validation.hpp"

namespace dimers::cli {

namespace {

using Json = nlohmann::ordered_json;

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw Error(std::string("cannot parse ") + what + " '" + s + "'");
    }
  }
  if (v.empty()) throw Error(std::string("empty ") + what);
  return v;
}

std::vector<std::vector<double>> parse_groups(const std::string& s, char sep, const char* what) {
  std::vector<std::vector<double>> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, sep)) out.push_back(parse_list(tok, what));
  return out;
}

ScalingParams parse_lambda(const std::string& s) {
  auto v = parse_list(s, "lambda");
  if (v.size() != 2) throw Error("lambda needs two components");
  return {v[0], v[1]};
}

std::vector<Interval> parse_intervals(const std::string& s) {
  std::vector<Interval> iv;
  for (auto& g : parse_groups(s, ':', "intervals")) {
    if (g.size() != 2) throw Error("each interval needs two endpoints");
    if (!(g[1] > g[0])) throw Error("interval endpoints must be increasing");
    iv.push_back({g[0], g[1]});
  }
  return iv;
}

// rejects overlaps only; touching endpoints are allowed
void reject_overlaps(std::vector<Interval> iv) {
  std::sort(iv.begin(), iv.end(), [](const Interval& a, const Interval& b) { return a.a < b.a; });
  for (std::size_t i = 0; i + 1 < iv.size(); ++i)
    if (iv[i + 1].a < iv[i].b) throw Error("overlapping intervals");
}

void check_tol(double t) {
  if (!(t > 0)) throw Error("tolerance must be positive");
}

ModelKind parse_model(const std::string& m) {
  if (m == "flipped") return ModelKind::Flipped;
  if (m == "drifted") return ModelKind::Drifted;
  if (m == "square-octagon") return ModelKind::SquareOctagon;
  throw Error("unknown model '" + m + "'");
}

CharPoly make_poly(const std::string& model, const std::string& weights) {
  CharPoly P{parse_model(model), parse_list(weights, "weights")};
  std::size_t need = P.kind == ModelKind::SquareOctagon ? 1 : 4;
  if (P.weights.size() != need) throw Error("model " + model + " needs " + std::to_string(need) + " weights");
  for (double w : P.weights)
    if (!(w > 0) || !std::isfinite(w)) throw Error("weights must be positive");
  P.laurent();
  return P;
}

PeriodicModel make_model(const CharPoly& P) {
  const auto& w = P.weights;
  switch (P.kind) {
    case ModelKind::Flipped: return PeriodicModel::flipped({w[0], w[1], w[2], w[3]});
    case ModelKind::Drifted: return PeriodicModel::drifted({w[0], w[1], w[2], w[3]});
    case ModelKind::SquareOctagon: return PeriodicModel::square_octagon(w[0]);
  }
  throw Error("unknown model");
}

Edge parse_edge(const std::vector<double>& v) {
  if (v.size() != 4) throw Error("an edge needs four coordinates x1,y1,x2,y2");
  for (double c : v)
    if (c != std::floor(c)) throw Error("edge coordinates must be integers");
  return make_edge({int(v[0]), int(v[1])}, {int(v[2]), int(v[3])});
}

Json edge_json(const Edge& e) {
  return Json{{"white", {e.white.x, e.white.y}}, {"black", {e.black.x, e.black.y}}};
}

std::string timestamp() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

// Config files: JSON objects (flat keys, or one object per subcommand) or TOML.
class FileConfig : public CLI::ConfigTOML {
 public:
  std::string section;

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos || text[first] != '{') {
      std::istringstream again(text);
      return CLI::ConfigTOML::from_config(again);
    }
    Json j = Json::parse(text);
    std::vector<CLI::ConfigItem> items;
    auto add = [&](const std::string& key, const Json& v, std::vector<std::string> parents) {
      CLI::ConfigItem it;
      it.parents = std::move(parents);
      it.name = key;
      auto str = [](const Json& x) { return x.is_string() ? x.get<std::string>() : x.dump(); };
      if (v.is_array()) {
        std::string joined;
        for (std::size_t i = 0; i < v.size(); ++i) joined += (i ? "," : "") + str(v[i]);
        it.inputs = {joined};
      } else {
        it.inputs = {str(v)};
      }
      items.push_back(std::move(it));
    };
    for (auto& [k, v] : j.items()) {
      if (v.is_object()) {
        if (k != section) continue;
        for (auto& [k2, v2] : v.items()) add(k2, v2, {section});
      } else if (k == "workers") {
        add(k, v, {});
      } else if (!section.empty()) {
        add(k, v, {section});
      }
    }
    return items;
  }
};

struct Shared {
  int workers = 1;
  std::string output;
  std::string format = "json";
};

class Runner {
 public:
  Runner(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}
  int run(int argc, const char* const* argv);

 private:
  std::ostream& out_;
  std::ostream& err_;
  CLI::App app_{"Dimer model computations: spectra, Green's functions, correlations, amoebas, sampling."};
  Shared g_;
  // option storage, by subcommand then option name
  std::map<std::string, std::map<std::string, std::string>> s_;
  std::map<std::string, std::map<std::string, double>> d_;
  std::map<std::string, std::map<std::string, std::int64_t>> i_;
  std::vector<std::string> ids_;

  CLI::App* sub(const std::string& name, const std::string& help);
  void add_str(CLI::App* a, const std::string& name, const std::string& help, const std::string& def = "",
               bool required = false);
  void add_num(CLI::App* a, const std::string& name, const std::string& help, double def);
  void add_int(CLI::App* a, const std::string& name, const std::string& help, std::int64_t def);
  Json resolved(const CLI::App* a) const;
  void emit(const CLI::App* a, Json result, const std::string& text = "");
  Json dispatch(const std::string& name, std::string& text);
};

CLI::App* Runner::sub(const std::string& name, const std::string& help) {
  auto* a = app_.add_subcommand(name, help);
  a->add_option("--output,-o", g_.output, "write the result here instead of standard output");
  return a;
}

void Runner::add_str(CLI::App* a, const std::string& name, const std::string& help, const std::string& def, bool req) {
  auto& v = s_[a->get_name()][name] = def;
  auto* o = a->add_option("--" + name, v, help);
  if (req) o->required();
  o->capture_default_str();
}

void Runner::add_num(CLI::App* a, const std::string& name, const std::string& help, double def) {
  auto& v = d_[a->get_name()][name] = def;
  a->add_option("--" + name, v, help)->capture_default_str();
}

void Runner::add_int(CLI::App* a, const std::string& name, const std::string& help, std::int64_t def) {
  auto& v = i_[a->get_name()][name] = def;
  a->add_option("--" + name, v, help)->capture_default_str();
}

Json Runner::resolved(const CLI::App* a) const {
  Json c = Json::object();
  for (const auto* o : a->get_options()) {
    std::string n = o->get_single_name();
    if (n == "help" || n == "output" || n.empty()) continue;
    auto find = [&](const auto& m) -> decltype(&m.begin()->second.begin()->second) {
      auto it = m.find(a->get_name());
      if (it == m.end()) return nullptr;
      auto jt = it->second.find(n);
      return jt == it->second.end() ? nullptr : &jt->second;
    };
    if (auto* v = find(s_)) c[n] = *v;
    else if (auto* v = find(d_)) c[n] = num(*v);
    else if (auto* v = find(i_)) c[n] = std::to_string(*v);
  }
  if (a->get_name() == "validate") c["criteria"] = ids_;
  return c;
}

void Runner::emit(const CLI::App* a, Json result, const std::string& text) {
  std::ofstream file;
  std::ostream* os = &out_;
  if (!g_.output.empty()) {
    file.open(g_.output);
    if (!file) throw Error("cannot open output file " + g_.output);
    os = &file;
  }
  if (!text.empty()) {
    *os << text;
    return;
  }
  Json j;
  j["command"] = a->get_name();
  j["version"] = DIMERS_VERSION;
  j["config"] = resolved(a);
  j["result"] = std::move(result);
  j["metadata"] = {{"timestamp", timestamp()}, {"workers", g_.workers}, {"simd", to_string(active_simd_level())}};
  *os << j.dump(2) << "\n";
}

Json Runner::dispatch(const std::string& name, std::string& text) {
  auto& S = s_[name];
  auto& D = d_[name];
  auto& I = i_[name];
  const std::string& fmt = S["format"];
  if (name == "free-energy") {
    check_tol(D["tol"]);
    auto fe = free_energy(make_poly(S["model"], S["weights"]), D["tol"]);
    return {{"value", num(fe.value)}, {"error_estimate", num(fe.error_estimate)}};
  }
  if (name == "edge-prob") {
    check_tol(D["tol"]);
    auto P = make_poly(S["model"], S["weights"]);
    if (P.kind == ModelKind::SquareOctagon) throw Error("edge-prob works on the square-grid models");
    std::vector<Edge> edges;
    for (auto& g : parse_groups(S["edges"], ';', "edges")) edges.push_back(parse_edge(g));
    check_vertex_disjoint(edges);
    InverseKasteleyn inv(make_model(P), FourierOptions{D["tol"]});
    Json r{{"probability", num(local_stats(edges, inv))}};
    Json ej = Json::array();
    for (const auto& e : edges) ej.push_back(edge_json(e));
    r["edges"] = ej;
    if (P.kind == ModelKind::Flipped) {
      FlippedWeights fw{P.weights[0], P.weights[1], P.weights[2], P.weights[3]};
      InverseKasteleyn d(PeriodicModel::drifted(to_drifted(fw)), FourierOptions{D["tol"]});
      r["probability_drifted_equivalent"] = num(local_stats(edges, d));
    }
    return r;
  }
  if (name == "inv-kasteleyn") {
    check_tol(D["tol"]);
    auto P = make_poly(S["model"], S["weights"]);
    auto m = make_model(P);
    int n = m.matrix().size();
    if (I["black-class"] < 0 || I["black-class"] >= n || I["white-class"] < 0 || I["white-class"] >= n)
      throw Error("class index out of range for this model");
    auto e = inv_kasteleyn(m, int(I["black-class"]), int(I["white-class"]), int(I["x"]), int(I["y"]), D["tol"]);
    return {{"re", num(e.value.real())}, {"im", num(e.value.imag())}, {"error_estimate", num(e.error)}};
  }
  if (name == "green") {
    auto l = parse_lambda(S["lambda"]);
    auto at = parse_list(S["at"], "point");
    if (at.size() != 2) throw Error("--at needs x,y");
    double x = at[0], y = at[1], k1 = D["k1"], k2 = D["k2"];
    const std::string& kind = S["kind"];
    double v;
    if (kind == "massive") v = green_massive(x, y, l);
    else if (kind == "drifted") v = green_drifted(x, y, l);
    else if (kind == "anisotropic") v = green_anisotropic(x, y, l, k1, k2);
    else if (kind == "anisotropic-limit") v = green_anisotropic_limit(x, y, l, k1, k2);
    else throw Error("unknown Green's function kind '" + kind + "'");
    Json r{{"value", num(v)}};
    if (D["eps"] > 0) {
      double e = D["eps"];
      FlippedWeights w;
      if (kind == "massive") w = {1, 1 - l.lambda1 * e, 1 - l.lambda2 * e, 1};
      else if (kind == "anisotropic-limit") w = {k2, k1 - l.lambda2 * e, k2 - l.lambda1 * e, k1};
      else throw Error("the discrete comparison is available for massive and anisotropic-limit");
      validate(w);
      auto h = discrete_green_massive(int(std::floor(x / e)), int(std::floor(y / e)), w, 1e-12);
      r["discrete_scaled"] = num(2 * h.value);
      r["discrete_error_estimate"] = num(2 * h.error);
      r["relative_difference"] = num(std::abs(2 * h.value - v) / std::abs(v));
    }
    return r;
  }
  if (name == "s2") {
    check_tol(D["tol"]);
    auto iv = parse_intervals(S["intervals"]);
    if (iv.size() != 2) throw Error("s2 needs two intervals");
    reject_overlaps(iv);
    auto q = s2(iv[0], iv[1], parse_lambda(S["lambda"]), D["tol"]);
    return {{"value", num(q.value)}, {"error_estimate", num(q.error)}};
  }
  if (name == "s4" || name == "wick-defect") {
    check_tol(D["tol"]);
    auto iv = parse_intervals(S["intervals"]);
    if (iv.size() != 4) throw Error(name + " needs four intervals");
    reject_overlaps(iv);
    CorrelationSpec spec{iv, parse_lambda(S["lambda"]), D["tol"]};
    auto w = wick_defect(spec);
    if (name == "s4" && !w.s4) throw Error("s4 needs intervals with positive gaps; touching intervals diverge");
    Json r;
    if (w.s4) r["s4"] = num(*w.s4);
    if (w.wick) r["wick"] = num(*w.wick);
    r["defect"] = num(w.defect);
    r["integral_f"] = num(w.integral_f);
    r["error_estimate"] = num(w.error_estimate);
    r["certified"] = w.certified;
    if (name == "wick-defect" && I["qmc"] > 0) {
      auto q = wick_defect_qmc(spec, int(I["qmc"]), 8, std::uint64_t(I["seed"]));
      r["qmc_defect"] = num(81 * q.first);
      r["qmc_stderr"] = num(81 * q.second);
    }
    return r;
  }
  if (name == "amoeba") {
    auto P = make_poly(S["model"], S["weights"]);
    auto L = P.laurent();
    const std::string& mode = S["mode"];
    auto pt = [&] {
      auto p = parse_list(S["point"], "point");
      if (p.size() != 2) throw Error("--point needs u,v");
      return AmoebaPoint{p[0], p[1]};
    };
    if (mode == "contains") {
      auto m = amoeba_membership(pt(), L);
      return {{"inside", m.inside}, {"ambiguous", m.ambiguous}, {"min_abs", num(m.min_abs)}, {"tol", num(m.tol)}};
    }
    if (mode == "phase") return {{"phase", to_string(classify_phase(L, pt()))}};
    if (mode == "intercepts") {
      auto l = parse_lambda(S["lambda"]);
      auto I0 = intercepts(l.lambda1, l.lambda2, D["eps"]);
      return {{"u_star", num(I0.u_star)}, {"v_star", num(I0.v_star)}};
    }
    if (mode == "boundary") {
      auto c = S["point"].empty() ? AmoebaPoint{0, 0} : pt();
      if (I["rays"] < 3) throw Error("--rays must be at least 3");
      auto b = hole_boundary(L, c, int(I["rays"]), D["radius"], 1e-12);
      if (fmt == "csv") {
        std::ostringstream o;
        o << "u,v\n";
        for (const auto& p : b) o << num(p.u) << "," << num(p.v) << "\n";
        text = o.str();
        return {};
      }
      Json pts = Json::array();
      for (const auto& p : b) pts.push_back({num(p.u), num(p.v)});
      return {{"boundary", pts}};
    }
    if (mode == "grid") {
      auto box = parse_list(S["box"], "box");
      if (box.size() != 4) throw Error("--box needs u0,u1,v0,v1");
      int n = int(I["n"]);
      if (n < 2 || n > 1000) throw Error("--n must be in [2, 1000]");
      std::vector<std::string> cell(static_cast<std::size_t>(n) * n);
      parallel_for(cell.size(), [&](std::size_t k) {
        AmoebaPoint p{box[0] + (box[1] - box[0]) * double(k % n) / (n - 1),
                      box[2] + (box[3] - box[2]) * double(k / n) / (n - 1)};
        try {
          cell[k] = to_string(classify_phase(L, p));
        } catch (const BoundaryAmbiguous&) {
          cell[k] = "boundary";
        }
      });
      std::ostringstream o;
      o << "u,v,phase\n";
      for (std::size_t k = 0; k < cell.size(); ++k)
        o << num(box[0] + (box[1] - box[0]) * double(k % n) / (n - 1)) << ","
          << num(box[2] + (box[3] - box[2]) * double(k / n) / (n - 1)) << "," << cell[k] << "\n";
      if (fmt == "csv") {
        text = o.str();
        return {};
      }
      std::map<std::string, int> counts;
      for (auto& c : cell) ++counts[c];
      return {{"counts", counts}};
    }
    throw Error("unknown amoeba mode '" + mode + "'");
  }
  if (name == "sample") {
    auto w = parse_list(S["weights"], "weights");
    if (w.size() != 4) throw Error("sample needs four drifted weights");
    DriftedWeights s{w[0], w[1], w[2], w[3]};
    validate(s);
    GridRegion g{int(I["width"]), int(I["height"])};
    g.validate();
    if (I["samples"] < 1) throw Error("--samples must be positive");
    auto n = static_cast<std::uint64_t>(I["samples"]);
    RngStream rng{static_cast<std::uint64_t>(I["seed"]), static_cast<std::uint64_t>(I["stream"])};
    auto R = temperley_region(g);
    int cn = (g.width - 1) / 2 + g.width * ((g.height - 1) / 2);
    Vertex c = g.node_vertex(cn);
    struct One {
      int arrow, height, defects;
    };
    std::vector<One> res(n);
    parallel_for(n, [&](std::size_t i) {
      auto t = wilson_sample(g, s, rng, i);
      auto d = tree_to_dimers(t);
      auto h = dimer_to_height(R, d);
      res[i] = {t.arrow[cn], h.at(c.x, c.y), height_loop_defects(R, d)};
    });
    static const char* dn[4] = {"N", "E", "S", "W"};
    std::ostringstream lines;
    double freq[4] = {}, hm = 0, h2 = 0;
    std::uint64_t count[4] = {};
    long defects = 0;
    for (std::size_t i = 0; i < n; ++i) {
      ++count[res[i].arrow];
      hm += res[i].height / double(n);
      h2 += double(res[i].height) * res[i].height / double(n);
      defects += res[i].defects;
      if (fmt == "ndjson")
        lines << Json{{"sample", i}, {"center_arrow", dn[res[i].arrow]}, {"center_height", res[i].height},
                      {"loop_defects", res[i].defects}}
                     .dump()
              << "\n";
    }
    for (int d = 0; d < 4; ++d) freq[d] = double(count[d]) / double(n);
    Json edges = Json::object();
    for (int d = 0; d < 4; ++d)
      edges[dn[d]] = {{"estimate", num(freq[d])}, {"std_error", num(std::sqrt(freq[d] * (1 - freq[d]) / double(n)))}};
    Json agg{{"center_node", {c.x, c.y}},
             {"center_edge_probability", edges},
             {"center_height_mean", num(hm)},
             {"center_height_variance", num(n > 1 ? (h2 - hm * hm) * double(n) / double(n - 1) : 0.0)},
             {"loop_defects", defects}};
    if (fmt == "ndjson") {
      lines << Json{{"aggregate", agg}}.dump() << "\n";
      text = lines.str();
      return {};
    }
    return agg;
  }
  if (name == "validate") {
    std::vector<int> ids;
    for (const auto& a : ids_) {
      if (a == "all") continue;
      try {
        ids.push_back(std::stoi(a));
      } catch (const std::exception&) {
        throw Error("unknown criterion '" + a + "'");
      }
      criterion_name(ids.back());
    }
    ValidationOptions o;
    o.seed = static_cast<std::uint64_t>(I["seed"]);
    bool json = fmt == "json";
    auto results = run_acceptance(ids, o, [&](const CriterionResult& r) {
      if (!json) out_ << format_result(r) << std::endl;
    });
    Json arr = Json::array();
    bool ok = true;
    for (const auto& r : results) {
      ok = ok && r.passed;
      arr.push_back({{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
    }
    if (!json) text = std::string(ok ? "all criteria passed\n" : "some criteria failed\n");
    return {{"passed", ok}, {"criteria", arr}};
  }
  throw Error("no subcommand given");
}

int Runner::run(int argc, const char* const* argv) {
  g_.workers = default_workers();
  app_.require_subcommand(1);
  app_.fallthrough();
  auto cfg = std::make_shared<FileConfig>();
  app_.config_formatter(cfg);
  app_.set_config("--config", "", "JSON or TOML file with option values");
  app_.add_option("--workers", g_.workers, "worker threads (default from DIMERS_WORKERS)")->capture_default_str();

  const std::string weights_help = "comma-separated weights: r1..r4, s1..s4 or t";
  auto* fe = sub("free-energy", "free energy of a periodic model");
  add_str(fe, "model", "flipped | drifted | square-octagon", "flipped");
  add_str(fe, "weights", weights_help, "", true);
  add_num(fe, "tol", "absolute tolerance", 1e-10);

  auto* ep = sub("edge-prob", "probability that a set of disjoint edges is covered");
  add_str(ep, "model", "flipped | drifted", "flipped");
  add_str(ep, "weights", weights_help, "", true);
  add_str(ep, "edges", "edges x1,y1,x2,y2 separated by ';'", "", true);
  add_num(ep, "tol", "quadrature tolerance", 1e-10);

  auto* ik = sub("inv-kasteleyn", "entry of the inverse Kasteleyn matrix");
  add_str(ik, "model", "flipped | drifted | square-octagon", "flipped");
  add_str(ik, "weights", weights_help, "", true);
  add_int(ik, "black-class", "black class index", 0);
  add_int(ik, "white-class", "white class index", 0);
  add_int(ik, "x", "domain(white) - domain(black), x", 0);
  add_int(ik, "y", "domain(white) - domain(black), y", 0);
  add_num(ik, "tol", "quadrature tolerance", 1e-10);

  auto* gr = sub("green", "continuum Green's functions and their discrete counterparts");
  add_str(gr, "kind", "massive | drifted | anisotropic | anisotropic-limit", "massive");
  add_str(gr, "lambda", "lambda1,lambda2", "", true);
  add_str(gr, "at", "x,y", "", true);
  add_num(gr, "k1", "anisotropy k1", 1);
  add_num(gr, "k2", "anisotropy k2", 1);
  add_num(gr, "eps", "lattice mesh for the discrete comparison (0: none)", 0);

  auto* s2c = sub("s2", "two-point integral over two intervals");
  add_str(s2c, "lambda", "lambda1,lambda2", "", true);
  add_str(s2c, "intervals", "a,b:c,d", "", true);
  add_num(s2c, "tol", "integration tolerance", 1e-10);

  auto* s4c = sub("s4", "four-point integral, Wick sum and defect over separated intervals");
  add_str(s4c, "lambda", "lambda1,lambda2", "", true);
  add_str(s4c, "intervals", "four intervals a,b:c,d:...", "", true);
  add_num(s4c, "tol", "integration tolerance", 1e-8);

  auto* wd = sub("wick-defect", "defect from Wick's rule over four intervals");
  add_str(wd, "lambda", "lambda1,lambda2", "", true);
  add_str(wd, "intervals", "four intervals a,b:c,d:...", "", true);
  add_num(wd, "tol", "integration tolerance", 1e-8);
  add_int(wd, "qmc", "also estimate by randomized QMC with this many points (0: off)", 0);
  add_int(wd, "seed", "QMC seed", 1);

  auto* am = sub("amoeba", "amoeba membership, phases, intercepts, boundaries and phase grids");
  add_str(am, "model", "flipped | drifted | square-octagon", "flipped");
  add_str(am, "weights", weights_help, "", true);
  add_str(am, "mode", "contains | phase | intercepts | boundary | grid", "contains");
  add_str(am, "point", "u,v (contains, phase; centre for boundary)", "");
  add_str(am, "lambda", "lambda1,lambda2 (intercepts)", "1,1");
  add_num(am, "eps", "eps (intercepts)", 1e-2);
  add_int(am, "rays", "number of rays (boundary)", 64);
  add_num(am, "radius", "search radius (boundary)", 1);
  add_str(am, "box", "u0,u1,v0,v1 (grid)", "-3,3,-3,3");
  add_int(am, "n", "grid points per side (grid)", 41);
  add_str(am, "format", "json | csv", "json");

  auto* sa = sub("sample", "Wilson-algorithm samples of the drifted dimer model on a wired grid");
  add_int(sa, "width", "tree nodes per row", 16);
  add_int(sa, "height", "tree nodes per column", 16);
  add_str(sa, "weights", "s1,s2,s3,s4 (N,E,S,W)", "1,1,1,1");
  add_int(sa, "samples", "number of samples", 100);
  add_int(sa, "seed", "seed", 1);
  add_int(sa, "stream", "stream index", 0);
  add_str(sa, "format", "json | ndjson", "json");

  auto* va = sub("validate", "run the acceptance battery");
  va->add_option("criteria", ids_, "criterion numbers or 'all'");
  add_int(va, "seed", "seed", 42);
  add_str(va, "format", "text | json", "text");

  for (int i = 1; i < argc; ++i)
    for (auto* a : app_.get_subcommands([](CLI::App*) { return true; }))
      if (a->get_name() == argv[i] && cfg->section.empty()) cfg->section = argv[i];

  try {
    app_.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app_.exit(e, out_, err_);
  } catch (const CLI::CallForAllHelp& e) {
    return app_.exit(e, out_, err_);
  } catch (const CLI::ParseError& e) {
    err_ << Json{{"error", {{"kind", "usage"}, {"message", e.what()}}}}.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err_ << Json{{"error", {{"kind", "config"}, {"message", e.what()}}}}.dump() << "\n";
    return 2;
  }
  try {
    if (g_.workers < 1) throw Error("--workers must be at least 1");
    set_default_workers(g_.workers);
    auto* a = app_.get_subcommands().front();
    if (s_[a->get_name()].count("format")) {
      std::string f = s_[a->get_name()]["format"];
      if (f != "json" && f != "csv" && f != "ndjson" && f != "text") throw Error("unknown format '" + f + "'");
    }
    std::string text;
    Json r = dispatch(a->get_name(), text);
    emit(a, r, text);
    if (a->get_name() == "validate" && !r["passed"].get<bool>()) return 1;
    return 0;
  } catch (const Error& e) {
    err_ << Json{{"error", {{"kind", "invalid-input"}, {"message", e.what()}}}}.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err_ << Json{{"error", {{"kind", "internal"}, {"message", e.what()}}}}.dump() << "\n";
    return 3;
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Runner r(out, err);
  return r.run(argc, argv);
}

}  // namespace dimers::cli
