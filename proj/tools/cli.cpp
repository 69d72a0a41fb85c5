#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "ims/cftp.hpp"
#include "ims/model_io.hpp"
#include "ims/oracle.hpp"
#include "ims/simulator.hpp"
#include "json.hpp"

#ifndef IMS_VERSION
#define IMS_VERSION "0.0.0"
#endif

namespace ims::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

namespace {

constexpr const char* kDefaultLattice = "16";

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw UsageError("cannot read " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size()) throw UsageError("bad number '" + item + "' in list");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError("empty number list");
  return out;
}

// ---------------------------------------------------------------- model loading

struct ModelOptions {
  std::string model;
  std::vector<std::string> params;
  std::string lattice;
  std::string kernel;
};

struct LoadedModel {
  ModelDocument doc;
  bool map_only = false;
  std::string source;
};

std::map<std::string, double> parse_params(const std::vector<std::string>& items) {
  std::map<std::string, double> out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--param expects key=value, got '" + item + "'");
    double v = 0.0;
    const auto* begin = item.data() + eq + 1;
    const auto* end = item.data() + item.size();
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end) throw UsageError("--param " + item + ": value is not a number");
    out[item.substr(0, eq)] = v;
  }
  return out;
}

LatticeSpec lattice_for(const ModelOptions& o, const std::optional<LatticeSpec>& from_file) {
  Kernel kernel = !o.kernel.empty() ? parse_kernel_spec(o.kernel)
                  : from_file      ? from_file->kernel
                                   : Kernel::nearest_neighbor();
  if (!o.lattice.empty()) return parse_lattice_spec(o.lattice, kernel);
  if (from_file) {
    auto spec = *from_file;
    spec.kernel = kernel;
    return spec;
  }
  return parse_lattice_spec(kDefaultLattice, kernel);
}

LoadedModel load_model(const ModelOptions& o) {
  const auto params = parse_params(o.params);
  LoadedModel out{ModelDocument{"", ModelSpec(1, {{InteractionMap::null_map(1), RateTable::zeros(1)}}), {}, {}},
                  false, o.model};
  if (o.model.rfind("builtin:", 0) == 0) {
    out.doc = builtin_document(o.model.substr(8), params, lattice_for(o, std::nullopt));
  } else if (o.model.rfind("map:", 0) == 0) {
    if (!params.empty()) throw UsageError("map: models take no parameters");
    const auto map = reference_map(o.model.substr(4));
    out.doc = ModelDocument{o.model.substr(4), ModelSpec(map.n(), {{map, RateTable::constant(map.n(), 1.0)}}),
                            lattice_for(o, std::nullopt), {}};
    out.map_only = true;
  } else {
    const auto text = read_file(o.model);
    const auto first = parse_model_file(text, std::nullopt, params);
    const auto lattice = lattice_for(o, first.lattice);
    out.doc = lattice == first.lattice ? first : parse_model_file(text, lattice, params);
  }
  return out;
}

Configuration parse_init(const std::string& spec, const ModelSpec& m, const Lattice& lat) {
  const auto [bottom, top] = extremal(m, lat);
  if (spec == "bottom") return bottom;
  if (spec == "top") return top;
  if (spec.rfind("single:", 0) == 0) {
    const auto rest = spec.substr(7);
    const auto colon = rest.find(':');
    if (colon == std::string::npos) throw UsageError("--init single:<site>:<type>");
    const auto site = std::stoul(rest.substr(0, colon));
    const int type = std::stoi(rest.substr(colon + 1));
    if (site >= lat.sites()) throw UsageError("--init site " + std::to_string(site) + " outside the lattice");
    if (type < 0 || type > m.n()) throw UsageError("--init type out of range");
    auto c = bottom;
    c.set(site, type);
    return c;
  }
  std::string line = spec;
  std::replace(line.begin(), line.end(), ',', ' ');
  return parse_configuration(line, m.n(), lat.sites());
}

// ---------------------------------------------------------------- outputs

class Outputs {
 public:
  explicit Outputs(std::string dir) : dir_(std::move(dir)) {
    if (!dir_.empty()) fs::create_directories(dir_);
  }
  bool enabled() const { return !dir_.empty(); }
  const std::string& dir() const { return dir_; }

  void write(const std::string& name, const std::string& content) {
    if (!enabled()) return;
    std::ofstream f(fs::path(dir_) / name, std::ios::binary);
    if (!f) throw UsageError("cannot write " + (fs::path(dir_) / name).string());
    f << content;
    hashes_[name] = hex64(fnv1a(content));
  }
  json hashes() const { return hashes_; }

 private:
  std::string dir_;
  json hashes_ = json::object();
};

struct Manifest {
  std::string subcommand;
  std::vector<std::string> args;
  json extra = json::object();
};

void write_manifest(Outputs& outputs, const Manifest& m, int code) {
  if (!outputs.enabled()) return;
  json j;
  j["tool"] = "imsctl";
  j["version"] = IMS_VERSION;
  j["subcommand"] = m.subcommand;
  j["args"] = m.args;
  for (const auto& [k, v] : m.extra.items()) j[k] = v;
  j["outputs"] = outputs.hashes();
  j["exit_code"] = code;
  std::ofstream f(fs::path(outputs.dir()) / "manifest.json", std::ios::binary);
  f << j.dump(2) << '\n';
}

void describe_model(json& extra, const LoadedModel& lm) {
  extra["model"] = lm.source;
  extra["model_hash"] = hex64(fnv1a(serialize_model(lm.doc)));
  extra["lattice"] = lm.doc.lattice.describe();
}

std::string types_line(const ModelSpec& m) {
  std::string s;
  for (int a = 0; a <= m.n(); ++a) s += (a ? " " : "") + std::to_string(a) + "=" + m.labels()[static_cast<std::size_t>(a)];
  return s;
}

// ---------------------------------------------------------------- subcommands

int cmd_check(const LoadedModel& lm, bool orderings, Outputs& outputs, Manifest& manifest, std::ostream& out) {
  const auto& m = lm.doc.model;
  std::ostringstream r;
  r << "model: " << lm.source << '\n';
  r << "types: " << types_line(m) << '\n';
  r << "layers: " << m.layer_count() << '\n';
  AttractivenessVerdict verdict;
  if (lm.map_only) {
    verdict = check_map_attractive(m.layer(0).map);
    r << "check: interaction map only\n";
  } else {
    verdict = check_ims_attractive(m);
    r << "check: interaction maps and rates\n";
  }
  r << "verdict: " << (verdict.attractive ? "attractive" : "NOT attractive") << '\n';
  if (!verdict.attractive) r << verdict.to_string();
  if (orderings) {
    const auto found = search_orderings(m);
    r << "attractive orderings: " << found.size() << '\n';
    for (const auto& p : found) r << "  " << p.to_string() << '\n';
  }
  out << r.str();
  outputs.write("report.txt", r.str());
  describe_model(manifest.extra, lm);
  return verdict.attractive ? kOk : kNegative;
}

struct SimulateOptions {
  double horizon = 0.0;
  std::uint64_t seed = 1;
  std::string init = "top";
  double grid_step = 0.0;
  bool events = false;
};

int cmd_simulate(const LoadedModel& lm, const SimulateOptions& o, Outputs& outputs, Manifest& manifest,
                 std::ostream& out) {
  const auto& m = lm.doc.model;
  const Lattice lat(lm.doc.lattice);
  if (!(o.horizon > 0.0)) throw UsageError("--horizon must be positive");
  const auto init = parse_init(o.init, m, lat);
  const auto stream = build_event_stream(m, lat, o.horizon, o.seed);
  const auto traj = evolve(init, stream, m, lat);

  std::ostringstream tcsv;
  tcsv << "event,t,site,from,to\n";
  for (const auto& tr : traj.transitions) {
    tcsv << tr.event_index << ',' << fmt(tr.t) << ',' << tr.site << ',' << int(tr.before) << ',' << int(tr.after)
         << '\n';
  }
  const double step = o.grid_step > 0.0 ? o.grid_step : o.horizon / 20.0;
  std::vector<double> grid;
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * step;
    if (t > o.horizon) break;
    grid.push_back(t);
  }
  if (grid.back() < o.horizon) grid.push_back(o.horizon);
  std::ostringstream dcsv;
  dcsv << 't';
  for (int a = 0; a <= m.n(); ++a) dcsv << ",type" << a;
  dcsv << '\n';
  for (const auto& row : density_series(traj, grid, m.n())) {
    dcsv << fmt(row.t);
    for (int a = 0; a <= m.n(); ++a) dcsv << ',' << fmt(row.fraction(a));
    dcsv << '\n';
  }
  outputs.write("trajectory.csv", tcsv.str());
  outputs.write("density.csv", dcsv.str());
  outputs.write("final.txt", format_configuration(traj.final) + "\n");
  if (o.events) {
    std::ostringstream ecsv;
    ecsv << "index,t,layer,x,y,dir,u\n";
    stream.for_each([&](const Event& e, std::size_t i) {
      ecsv << i << ',' << fmt(e.t) << ',' << e.layer << ',' << e.x << ',' << e.y << ',' << to_string(e.dir) << ','
           << fmt(e.u) << '\n';
    });
    outputs.write("events.csv", ecsv.str());
  }
  out << "final: " << format_configuration(traj.final) << '\n';
  out << "transitions: " << traj.transitions.size() << '\n';
  describe_model(manifest.extra, lm);
  manifest.extra["seed"] = o.seed;
  manifest.extra["horizon"] = o.horizon;
  return kOk;
}

struct CoupleOptions {
  std::string lower;
  std::string upper;
  double horizon = 0.0;
  std::uint64_t seed = 1;
  std::vector<std::string> upper_params;
};

void transitions_csv(std::ostringstream& os, const std::string& run, const Trajectory& t) {
  for (const auto& tr : t.transitions) {
    os << run << ',' << tr.event_index << ',' << fmt(tr.t) << ',' << tr.site << ',' << int(tr.before) << ','
       << int(tr.after) << '\n';
  }
}

int cmd_couple(const ModelOptions& mo, const LoadedModel& lm, const CoupleOptions& o, Outputs& outputs,
               Manifest& manifest, std::ostream& out) {
  const auto& m = lm.doc.model;
  const Lattice lat(lm.doc.lattice);
  if (!(o.horizon > 0.0)) throw UsageError("--horizon must be positive");
  const auto lo = parse_init(o.lower, m, lat);
  const auto hi = parse_init(o.upper, m, lat);
  std::ostringstream r, csv;
  csv << "run,event,t,site,from,to\n";
  r << "model: " << lm.source << '\n';
  r << "lower: " << format_configuration(lo) << '\n';
  r << "upper: " << format_configuration(hi) << '\n';
  r << "initial relation: " << to_string(compare_configs(lo, hi)) << '\n';
  std::optional<OrderBreak> brk;
  Configuration lo_final, hi_final;
  if (o.upper_params.empty()) {
    r << "coupling: shared events, one parameter set\n";
    r << "model attractive: " << (check_ims_attractive(m).attractive ? "yes" : "no") << '\n';
    const auto run = coupled_evolve({lo, hi}, build_event_stream(m, lat, o.horizon, o.seed), m, lat);
    if (!run.breaks.empty()) brk = run.breaks.front();
    lo_final = run.trajectories[0].final;
    hi_final = run.trajectories[1].final;
    transitions_csv(csv, "lower", run.trajectories[0]);
    transitions_csv(csv, "upper", run.trajectories[1]);
  } else {
    auto upper_opts = mo;
    upper_opts.params.insert(upper_opts.params.end(), o.upper_params.begin(), o.upper_params.end());
    const auto upper = load_model(upper_opts);
    r << "coupling: shared events, upper parameters";
    for (const auto& p : o.upper_params) r << ' ' << p;
    r << '\n';
    const auto run = param_coupled_evolve(lo, hi, m, upper.doc.model, lat, o.horizon, o.seed);
    brk = run.first_break;
    lo_final = run.lower.final;
    hi_final = run.upper.final;
    transitions_csv(csv, "lower", run.lower);
    transitions_csv(csv, "upper", run.upper);
    manifest.extra["upper_model_hash"] = hex64(fnv1a(serialize_model(upper.doc)));
  }
  r << "final lower: " << format_configuration(lo_final) << '\n';
  r << "final upper: " << format_configuration(hi_final) << '\n';
  if (brk) {
    r << "order: BROKEN\n" << brk->describe() << '\n';
  } else {
    r << "order: " << (config_leq(lo, hi) ? "held at every event" : "initial pair not ordered") << '\n';
  }
  out << r.str();
  outputs.write("report.txt", r.str());
  outputs.write("trajectories.csv", csv.str());
  describe_model(manifest.extra, lm);
  manifest.extra["seed"] = o.seed;
  manifest.extra["horizon"] = o.horizon;
  return brk ? kNegative : kOk;
}

struct CftpCliOptions {
  std::size_t samples = 100;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  int max_epochs = 24;
  double base_window = 0.0;
};

int cmd_cftp(const LoadedModel& lm, const CftpCliOptions& o, Outputs& outputs, Manifest& manifest,
             std::ostream& out) {
  const auto& m = lm.doc.model;
  const Lattice lat(lm.doc.lattice);
  describe_model(manifest.extra, lm);
  manifest.extra["seed"] = o.seed;
  const unsigned threads = o.threads ? o.threads : std::max(1u, std::thread::hardware_concurrency());
  std::ostringstream r;
  r << "model: " << lm.source << '\n';
  r << "samples: " << o.samples << " (seeds " << o.seed << ".." << o.seed + o.samples - 1 << ")\n";
  CftpBatch batch;
  try {
    batch = cftp_batch(m, lat, o.seed, o.samples, {o.base_window, o.max_epochs}, threads);
  } catch (const CftpBatchError& e) {
    r << "FAILED: " << e.failures().size() << " sample(s) did not coalesce\n";
    for (std::size_t i = 0; i < std::min<std::size_t>(5, e.failures().size()); ++i) {
      r << "  seed " << o.seed + e.failures()[i].index << ": " << e.failures()[i].message << '\n';
    }
    out << r.str();
    outputs.write("report.txt", r.str());
    return kNegative;
  }
  std::ostringstream samples, hist;
  int max_epochs = 0;
  std::size_t events = 0;
  for (const auto& s : batch.samples) {
    samples << format_configuration(s.sample) << '\n';
    max_epochs = std::max(max_epochs, s.epochs_used);
    events += s.events_consumed;
  }
  hist << (batch.by_counts ? "type_counts" : "configuration") << ",count\n";
  for (const auto& [k, v] : batch.histogram) hist << k << ',' << v << '\n';
  r << "histogram keyed by: " << (batch.by_counts ? "type counts" : "configuration") << '\n';
  r << "distinct keys: " << batch.histogram.size() << '\n';
  r << "largest epoch: " << max_epochs << '\n';
  r << "events consumed: " << events << '\n';
  out << r.str();
  outputs.write("samples.txt", samples.str());
  outputs.write("histogram.csv", hist.str());
  outputs.write("report.txt", r.str());
  return kOk;
}

struct OracleOptions {
  std::string times = "0.1,1,10";
  double tol = 1e-9;
};

int cmd_oracle(const LoadedModel& lm, const OracleOptions& o, Outputs& outputs, Manifest& manifest,
               std::ostream& out) {
  const auto& m = lm.doc.model;
  const Lattice lat(lm.doc.lattice);
  describe_model(manifest.extra, lm);
  const auto g = build_generator(m, lat);
  std::ostringstream r;
  r << "model: " << lm.source << '\n';
  r << "lattice: " << lat.spec().describe() << '\n';
  r << "states: " << g.index.size() << '\n';
  const bool checker = check_ims_attractive(m).attractive;
  r << "pairwise checker: " << (checker ? "attractive" : "NOT attractive") << '\n';
  bool negative = false;
  if (g.index.size() <= kMaxUpSetStates) {
    const auto ups = enumerate_upsets(g.index);
    r << "up-sets: " << ups.size() << '\n';
    const auto gen = generator_monotone(g, ups);
    r << "generator: " << gen.describe(g.index, ups);
    const auto semi = semigroup_monotone(g, ups, parse_list(o.times), o.tol);
    r << "semigroup (t in {" << o.times << "}, tol " << fmt(o.tol) << "): " << semi.describe(g.index, ups);
    negative = !gen.monotone || !semi.monotone;
  } else {
    r << "up-sets: skipped, more than " << kMaxUpSetStates << " states\n";
  }
  if (g.index.size() * g.index.size() <= kMaxOracleStates) {
    const auto cp = coupled_order_preserved(build_coupled_generator(m, m, lat));
    r << "basic coupling: " << cp.describe(g.index);
    negative = negative || !cp.preserved;
  } else {
    r << "basic coupling: skipped, coupled space too large\n";
  }
  const auto st = stationary(g);
  r << "closed classes: " << st.closed_classes << (st.unique ? " (unique stationary law)" : "") << '\n';
  std::ostringstream csv;
  csv << "state,probability\n";
  for (std::size_t s = 0; s < g.index.size(); ++s) {
    csv << format_configuration(g.index.decode(s)) << ',' << fmt(st.distribution(static_cast<Eigen::Index>(s)))
        << '\n';
  }
  out << r.str();
  outputs.write("report.txt", r.str());
  outputs.write("stationary.csv", csv.str());
  return negative ? kNegative : kOk;
}

struct EquivalenceCliOptions {
  EquivalenceOptions study;
  std::string times = "0.1,1,10";
};

std::string map_cells(const InteractionMap& j) {
  std::string s;
  for (auto v : j.table()) s += std::to_string(int(v));
  return s;
}

int cmd_equivalence(EquivalenceCliOptions o, Outputs& outputs, Manifest& manifest, std::ostream& out) {
  o.study.times = parse_list(o.times);
  const auto trials = equivalence_study(o.study);
  std::ostringstream csv, r;
  csv << "trial,map,rates,checker,generator,semigroup\n";
  std::size_t gen_agree = 0, semi_agree = 0, attractive = 0;
  for (const auto& t : trials) {
    const auto& layer = t.model.layer(0);
    csv << t.index << ',' << map_cells(layer.map) << ',';
    for (std::size_t i = 0; i < layer.rates.table().size(); ++i) csv << (i ? " " : "") << fmt(layer.rates.table()[i]);
    csv << ',' << t.checker << ',' << t.generator << ',' << t.semigroup << '\n';
    gen_agree += t.checker == t.generator;
    semi_agree += t.semigroup == t.generator;
    attractive += t.checker;
  }
  r << "trials: " << trials.size() << " (n=" << o.study.n << ", " << o.study.sites << " sites, free boundary)\n";
  r << "attractive by checker: " << attractive << '\n';
  r << "checker agrees with generator: " << gen_agree << '/' << trials.size() << '\n';
  r << "semigroup agrees with generator: " << semi_agree << '/' << trials.size() << '\n';
  out << r.str();
  outputs.write("equivalence.csv", csv.str());
  outputs.write("report.txt", r.str());
  manifest.extra["seed"] = o.study.seed;
  return gen_agree == trials.size() && semi_agree == trials.size() ? kOk : kNegative;
}

int cmd_replay(const std::string& manifest_path, std::string out_dir, std::ostream& out, std::ostream& err) {
  const auto text = read_file(manifest_path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw UsageError(std::string("manifest is not valid JSON: ") + e.what());
  }
  const fs::path original = fs::path(manifest_path).parent_path();
  if (out_dir.empty()) out_dir = (original / "replay").string();
  if (fs::weakly_canonical(out_dir) == fs::weakly_canonical(original.empty() ? "." : original)) {
    throw UsageError("replay output directory must differ from the original run");
  }
  std::vector<std::string> args{j.at("subcommand").get<std::string>()};
  for (const auto& a : j.at("args")) args.push_back(a.get<std::string>());
  args.push_back("--out");
  args.push_back(out_dir);
  std::ostringstream sink;
  const int code = run(args, sink, err);
  const auto replayed = json::parse(read_file(fs::path(out_dir) / "manifest.json"));
  bool same = code == j.at("exit_code").get<int>();
  if (j.contains("model_hash") && replayed.value("model_hash", "") != j["model_hash"]) {
    out << "DIFFERS model (hash " << j["model_hash"].get<std::string>() << " -> "
        << replayed.value("model_hash", "") << ")\n";
    same = false;
  }
  for (const auto& [name, hash] : j.at("outputs").items()) {
    const auto a = read_file(original / name);
    const auto b = fs::exists(fs::path(out_dir) / name) ? read_file(fs::path(out_dir) / name) : std::string();
    const bool ok = a == b && hex64(fnv1a(a)) == hash.get<std::string>();
    out << (ok ? "identical " : "DIFFERS ") << name << '\n';
    same = same && ok;
  }
  out << (same ? "replay: byte-identical" : "replay: MISMATCH") << '\n';
  return same ? kOk : kNegative;
}

void add_model_options(CLI::App* sub, ModelOptions& o) {
  sub->add_option("model", o.model, "model file, builtin:NAME or map:NAME")->required();
  sub->add_option("--param,-p", o.params, "parameter override key=value (repeatable)");
  sub->add_option("--lattice,-l", o.lattice, "sides and boundary, e.g. 32, 8:free, 4x4:periodic");
  sub->add_option("--kernel,-k", o.kernel, "nn, nn:W, box:R or complete");
}

// Arguments as they should be replayed: no --out, model path made absolute.
std::vector<std::string> replay_args(const std::vector<std::string>& args, const std::string& model) {
  std::vector<std::string> out;
  bool replaced = false;
  for (std::size_t i = 1; i < args.size(); ++i) {
    const auto& a = args[i];
    if (a == "--out" || a == "-o") {
      ++i;
      continue;
    }
    if (a.rfind("--out=", 0) == 0) continue;
    if (!replaced && !model.empty() && a == model && model.find(':') == std::string::npos) {
      out.push_back(fs::absolute(model).string());
      replaced = true;
      continue;
    }
    out.push_back(a);
  }
  return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Interaction map systems: attractiveness checks, coupled simulation, oracles and exact sampling",
               "imsctl"};
  app.set_version_flag("--version", IMS_VERSION);
  app.require_subcommand(1);
  std::string out_dir;

  ModelOptions mo;
  bool orderings = false;
  auto* check = app.add_subcommand("check", "attractiveness verdict with named violations");
  add_model_options(check, mo);
  check->add_flag("--search-orderings", orderings, "also list every attractive reordering of the types");

  SimulateOptions so;
  auto* simulate = app.add_subcommand("simulate", "graphical-representation simulation");
  add_model_options(simulate, mo);
  simulate->add_option("--horizon,-T", so.horizon, "final time")->required();
  simulate->add_option("--seed,-s", so.seed, "event stream seed");
  simulate->add_option("--init", so.init, "bottom, top, single:SITE:TYPE or a configuration line");
  simulate->add_option("--grid-step", so.grid_step, "density sampling step (default horizon/20)");
  simulate->add_flag("--events", so.events, "also write every event to events.csv");

  CoupleOptions co;
  auto* couple = app.add_subcommand("couple", "evolve two configurations on shared events");
  add_model_options(couple, mo);
  couple->add_option("--lower", co.lower, "first configuration (same forms as --init)")->required();
  couple->add_option("--upper", co.upper, "second configuration")->required();
  couple->add_option("--horizon,-T", co.horizon, "final time")->required();
  couple->add_option("--seed,-s", co.seed, "event stream seed");
  couple->add_option("--upper-param", co.upper_params, "parameter overrides for the upper copy (key=value)");

  CftpCliOptions cf;
  auto* cftp = app.add_subcommand("cftp", "exact stationary samples by coupling from the past");
  add_model_options(cftp, mo);
  cftp->add_option("--samples,-n", cf.samples, "number of samples");
  cftp->add_option("--seed,-s", cf.seed, "seed of the first sample; sample i uses seed+i");
  cftp->add_option("--threads,-j", cf.threads, "worker threads (0 = all cores); output does not depend on it");
  cftp->add_option("--max-epochs", cf.max_epochs, "give up after this many window doublings");
  cftp->add_option("--base-window", cf.base_window, "first lookback T0 (0 = sites / c)");

  OracleOptions oo;
  auto* oracle = app.add_subcommand("oracle", "exact generator checks on a tiny lattice");
  add_model_options(oracle, mo);
  oracle->add_option("--times", oo.times, "comma-separated semigroup times");
  oracle->add_option("--tol", oo.tol, "semigroup tolerance");

  EquivalenceCliOptions eo;
  auto* equivalence = app.add_subcommand("equivalence", "random single-map systems: checker vs exact monotonicity");
  equivalence->add_option("--trials", eo.study.trials, "number of random systems");
  equivalence->add_option("--seed,-s", eo.study.seed, "seed");
  equivalence->add_option("--types", eo.study.n, "largest type n");
  equivalence->add_option("--sites", eo.study.sites, "sites on the free-boundary segment");
  equivalence->add_option("--rate-low", eo.study.rate_low, "smallest rate");
  equivalence->add_option("--rate-high", eo.study.rate_high, "largest rate");
  equivalence->add_option("--times", eo.times, "comma-separated semigroup times");
  equivalence->add_option("--tol", eo.study.tol, "semigroup tolerance");

  std::string manifest_path;
  auto* replay = app.add_subcommand("replay", "re-run a recorded run and compare outputs byte for byte");
  replay->add_option("manifest", manifest_path, "manifest.json of the original run")->required();

  for (auto* sub : {check, simulate, couple, cftp, oracle, equivalence, replay}) {
    sub->add_option("--out,-o", out_dir, "output directory");
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << IMS_VERSION << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kOk;
    }
    err << "imsctl: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (replay->parsed()) return cmd_replay(manifest_path, out_dir, out, err);
    Outputs outputs(out_dir);
    Manifest manifest;
    manifest.subcommand = app.get_subcommands().front()->get_name();
    manifest.args = replay_args(args, mo.model);
    int code = kOk;
    if (equivalence->parsed()) {
      code = cmd_equivalence(eo, outputs, manifest, out);
    } else {
      const auto lm = load_model(mo);
      if (check->parsed()) code = cmd_check(lm, orderings, outputs, manifest, out);
      else if (simulate->parsed()) code = cmd_simulate(lm, so, outputs, manifest, out);
      else if (couple->parsed()) code = cmd_couple(mo, lm, co, outputs, manifest, out);
      else if (cftp->parsed()) code = cmd_cftp(lm, cf, outputs, manifest, out);
      else if (oracle->parsed()) code = cmd_oracle(lm, oo, outputs, manifest, out);
    }
    write_manifest(outputs, manifest, code);
    return code;
  } catch (const UsageError& e) {
    err << "imsctl: " << e.what() << '\n';
  } catch (const DomainError& e) {
    err << "imsctl: " << e.what() << '\n';
  } catch (const PreconditionError& e) {
    err << "imsctl: " << e.what() << '\n';
  } catch (const CapacityError& e) {
    err << "imsctl: " << e.what() << '\n';
  } catch (const std::invalid_argument& e) {
    err << "imsctl: bad number in arguments\n";
  } catch (const std::out_of_range& e) {
    err << "imsctl: number out of range in arguments\n";
  } catch (const fs::filesystem_error& e) {
    err << "imsctl: " << e.what() << '\n';
  }
  return kUsage;
}

}  // namespace ims::cli
