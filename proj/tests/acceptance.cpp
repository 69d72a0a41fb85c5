// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "cli.hpp"
#include "ims/cftp.hpp"
#include "ims/model_io.hpp"
#include "ims/oracle.hpp"
#include "ims/simulator.hpp"

using namespace ims;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

Lattice ring(int l) { return build_lattice(1, {l}, Boundary::Periodic, Kernel::nearest_neighbor()); }
Lattice segment(int l) { return build_lattice(1, {l}, Boundary::Free, Kernel::nearest_neighbor()); }

ModelSpec builtin(const std::string& name, const Lattice& lat, std::map<std::string, double> over = {}) {
  auto p = builtin_defaults(name);
  for (const auto& [k, v] : over) p[k] = v;
  return builtin_model(name, p, lat.max_mass());
}

const std::vector<std::string> kAttractive{"contact", "voter", "two_type_reordered", "two_stage", "gbt",
                                           "noisy_contact"};

bool over_budget(double seconds, double limit, Outcome& o) {
  if (seconds <= limit) return false;
  o.pass = false;
  o.detail += "; runtime " + std::to_string(seconds) + " s exceeds " + std::to_string(limit) + " s";
  return true;
}

int failures = 0;

void criterion(int id, const std::string& title, double limit, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (limit > 0) over_budget(secs, limit, o);
  failures += !o.pass;
  std::ostringstream t;
  t << std::fixed << std::setprecision(2) << secs;
  std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << title << "  [" << o.detail
            << "; " << t.str() << " s]" << std::endl;
}

bool has_violation(const AttractivenessVerdict& v, Condition c, TypePair first, TypePair second) {
  return std::any_of(v.violations.begin(), v.violations.end(), [&](const Violation& x) {
    return x.condition == c && x.first == first && x.second == second;
  });
}

// Ordered pair lo <= hi with independent uniform types.
std::pair<Configuration, Configuration> random_ordered_pair(std::mt19937_64& rng, std::size_t sites, int n) {
  std::uniform_int_distribution<int> t(0, n);
  Configuration lo(sites, 0), hi(sites, 0);
  for (std::size_t x = 0; x < sites; ++x) {
    const int a = t(rng), b = t(rng);
    lo.set(x, std::min(a, b));
    hi.set(x, std::max(a, b));
  }
  return {lo, hi};
}

// ---------------------------------------------------------------- 1

Outcome map_verdicts() {
  Outcome o;
  std::vector<std::string> wrong;
  const auto basic = check_map_attractive(reference_map("two_type"));
  if (basic.attractive || !has_violation(basic, Condition::C, {0, 2}, {1, 2})) {
    wrong.push_back("two_type (expected condition (c) at (0,2)/(1,2))");
  }
  for (const auto& name : {"two_type_modified_a", "two_type_modified_b", "two_type_modified_c",
                           "two_type_reordered", "gbt_base", "gbt_tree_birth", "contact", "voter"}) {
    const auto v = check_map_attractive(reference_map(name));
    if (!v.attractive) {
      std::string first = v.violations.front().detail;
      wrong.push_back(std::string(name) + " is not attractive: " + first);
    }
  }
  for (const auto& name : kAttractive) {
    if (!check_ims_attractive(builtin(name, ring(8))).attractive) wrong.push_back("system " + name);
  }
  o.pass = wrong.empty();
  o.detail = o.pass ? "9 maps and 6 systems as expected" : "mismatch: ";
  for (std::size_t i = 0; i < wrong.size(); ++i) o.detail += (i ? "; " : "") + wrong[i];
  return o;
}

// ---------------------------------------------------------------- 2

Outcome reordering() {
  const auto p = builtin_defaults("two_type");
  const double w = 2.0;
  const double l1 = p.at("lambda1"), l2 = p.at("lambda2"), d1 = p.at("delta1") / w, d2 = p.at("delta2") / w;
  const auto pi = Permutation::swap(2, 0, 1);
  const auto got = apply_permutation(builtin_model("two_type", p, w), pi);
  const Layer literal{InteractionMap::from_rows({{1, 0, 1}, {1, 1, 1}, {1, 2, 1}}),
                      RateTable::from_rows({{d1, l1, d2}, {d1, 0, d2}, {d1, l2, d2}})};
  Outcome o;
  const bool map_eq = got.layer(0).map == literal.map;
  const bool rate_eq = got.layer(0).rates == literal.rates;
  const auto found = search_orderings(builtin_model("two_type", p, w));
  const bool searched = std::find(found.begin(), found.end(), pi) != found.end();
  o.pass = map_eq && rate_eq && searched;
  o.detail = std::string("map ") + (map_eq ? "equal" : "DIFFERS") + ", rates " + (rate_eq ? "equal" : "DIFFER") +
             ", search finds swap 0<->1: " + (searched ? "yes" : "no") + " (" + std::to_string(found.size()) +
             " orderings)";
  return o;
}

// ---------------------------------------------------------------- 3

Outcome equivalence() {
  const auto trials = equivalence_study({});
  std::size_t gen = 0, semi = 0, attractive = 0;
  for (const auto& t : trials) {
    gen += t.checker == t.generator;
    semi += t.semigroup == t.generator;
    attractive += t.checker;
  }
  // I.i.d. maps are rarely attractive, so every attractive n = 2 map is also
  // run once with random positive rates.
  const auto lat = segment(2);
  const StateSpaceIndex index(2, 2);
  const auto ups = enumerate_upsets(index);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> rate(0.5, 2.0);
  std::size_t extra = 0, extra_agree = 0, extra_attractive = 0;
  for (int code = 0; code < 19683; ++code) {
    std::vector<ParticleType> table(9);
    for (int i = 0, c = code; i < 9; ++i, c /= 3) table[static_cast<std::size_t>(i)] = static_cast<ParticleType>(c % 3);
    const InteractionMap j(2, table);
    if (!check_map_attractive(j).attractive) continue;
    std::vector<double> r(9);
    for (auto& v : r) v = rate(rng);
    const ModelSpec m(2, {{j, RateTable(2, r)}});
    const bool checker = check_ims_attractive(m).attractive;
    extra_agree += checker == generator_monotone(build_generator(m, lat), ups, 1).monotone;
    extra_attractive += checker;
    ++extra;
  }
  Outcome o;
  o.pass = trials.size() >= 200 && gen == trials.size() && semi == trials.size() && extra_agree == extra;
  o.detail = std::to_string(trials.size()) + " random trials (" + std::to_string(attractive) +
             " attractive): checker = generator in " + std::to_string(gen) + ", semigroup = generator in " +
             std::to_string(semi) + "; every attractive map (" + std::to_string(extra) + ", " +
             std::to_string(extra_attractive) + " with attractive rates): checker = generator in " +
             std::to_string(extra_agree);
  return o;
}

// ---------------------------------------------------------------- 4

Outcome graphical_coupling() {
  const auto lat = ring(32);
  std::size_t breaks = 0, runs = 0, events = 0;
  for (const auto& name : kAttractive) {
    const auto m = builtin(name, lat);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      std::mt19937_64 rng(seed * 7919 + 1);
      std::vector<Configuration> configs;
      for (int k = 0; k < 10; ++k) {
        auto [lo, hi] = random_ordered_pair(rng, lat.sites(), m.n());
        configs.push_back(std::move(lo));
        configs.push_back(std::move(hi));
      }
      const auto stream = build_event_stream(m, lat, 10.0, seed);
      const auto run = coupled_evolve(configs, stream, m, lat, OrderCheck::Record);
      breaks += run.breaks.size();
      events += stream.events().size();
      ++runs;
    }
  }
  return {breaks == 0, std::to_string(runs) + " coupled runs of 20 configurations, " + std::to_string(events) +
                           " events, " + std::to_string(breaks) + " order violations"};
}

// ---------------------------------------------------------------- 5

Outcome basic_coupling() {
  const auto lat = segment(2);
  Outcome o;
  std::vector<std::string> wrong;
  for (const auto& name : kAttractive) {
    const auto m = builtin(name, lat);
    if (!coupled_order_preserved(build_coupled_generator(m, m, lat)).preserved) wrong.push_back(name);
  }
  const auto basic = builtin("two_type", lat);
  const auto cg = build_coupled_generator(basic, basic, lat);
  const auto rep = coupled_order_preserved(cg);
  const auto eta = cg.index.encode(Configuration(std::vector<ParticleType>{0, 2}));
  const auto xi = cg.index.encode(Configuration(std::vector<ParticleType>{1, 2}));
  const bool counterexample = !rep.preserved && rep.has_escape_from(eta, xi);
  o.pass = wrong.empty() && counterexample;
  o.detail = "attractive models preserved: " + std::to_string(kAttractive.size() - wrong.size()) + "/" +
             std::to_string(kAttractive.size()) + "; two_type escape from (0 2)/(1 2): " +
             (counterexample ? "yes" : "no");
  for (const auto& w : wrong) o.detail += "; not preserved: " + w;
  return o;
}

// ---------------------------------------------------------------- 6

struct PairRun {
  std::optional<std::uint64_t> first_break;
  std::string break_relation;
  std::optional<std::uint64_t> first_incomparable;
};

PairRun couple_from(const ModelSpec& m, const Lattice& lat, const Configuration& eta, const Configuration& xi) {
  PairRun out;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto stream = build_event_stream(m, lat, 10.0, seed);
    if (!out.first_break) {
      const auto run = coupled_evolve({eta, xi}, stream, m, lat, OrderCheck::Record);
      if (!run.breaks.empty()) {
        out.first_break = seed;
        const auto& b = run.breaks.front();
        out.break_relation = std::string(to_string(compare_configs(b.lower_after, b.upper_after)));
      }
    }
    if (!out.first_incomparable) {
      auto lo = eta, hi = xi;
      stream.for_each([&](const Event& e, std::size_t) {
        if (out.first_incomparable) return;
        apply_event_in_place(lo, e, m, lat);
        apply_event_in_place(hi, e, m, lat);
        if (compare_configs(lo, hi) == OrderRelation::Incomparable) out.first_incomparable = seed;
      });
    }
  }
  return out;
}

std::string seed_or_none(const std::optional<std::uint64_t>& s) { return s ? std::to_string(*s) : "none"; }

// With equal rates for both species the shared marks move them in lockstep,
// so the pair can only become greater-or-equal. Distinct birth rates are
// needed to reach an incomparable pair.
Outcome dynamic_counterexample() {
  const auto lat = segment(2);
  const Configuration eta(std::vector<ParticleType>{0, 2}), xi(std::vector<ParticleType>{1, 2});
  const auto symmetric = couple_from(builtin("two_type", lat), lat, eta, xi);
  const auto distinct = couple_from(builtin("two_type", lat, {{"lambda2", 1.5}}), lat, eta, xi);
  Outcome o;
  o.pass = symmetric.first_break.has_value() && distinct.first_incomparable.has_value();
  o.detail = "default rates: order broken at seed " + seed_or_none(symmetric.first_break) + " (" +
             symmetric.break_relation + "), incomparable at seed " + seed_or_none(symmetric.first_incomparable) +
             "; lambda2 = 1.5: order broken at seed " + seed_or_none(distinct.first_break) + " (" +
             distinct.break_relation + "), incomparable at seed " + seed_or_none(distinct.first_incomparable);
  return o;
}

// ---------------------------------------------------------------- 7

Outcome parameter_monotonicity() {
  const auto lat = ring(32);
  const auto weak = builtin("contact", lat, {{"lambda", 1.0}});
  const auto strong = builtin("contact", lat, {{"lambda", 2.0}});
  std::size_t breaks = 0;
  double density_gap = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    const auto [lo, hi] = random_ordered_pair(rng, lat.sites(), 1);
    for (const auto& [a, b] : {std::pair{lo, hi}, std::pair{Configuration(32, 1), Configuration(32, 1)}}) {
      const auto run = param_coupled_evolve(a, b, weak, strong, lat, 10.0, seed);
      breaks += run.first_break.has_value();
      const auto count = [](const Configuration& c) { return std::count(c.values().begin(), c.values().end(), 1); };
      density_gap += static_cast<double>(count(run.upper.final) - count(run.lower.final)) / 32.0;
    }
  }
  return {breaks == 0, "200 coupled runs (lambda 1 below lambda 2), " + std::to_string(breaks) +
                           " order breaks, mean final density gap " + std::to_string(density_gap / 200.0)};
}

// ---------------------------------------------------------------- 8

Outcome cftp_exactness() {
  Outcome o;
  std::ostringstream d;
  // (i)
  const auto l8 = ring(8);
  const auto contact = cftp_batch(builtin("contact", l8), l8, 1, 200, {}, 4);
  const bool all_empty = std::all_of(contact.samples.begin(), contact.samples.end(),
                                     [](const CftpResult& r) { return r.sample == Configuration(8, 0); });
  d << "(i) contact L=8: " << (all_empty ? "200/200 empty" : "NON-EMPTY sample");
  // (ii)
  bool raised = false;
  try {
    cftp_sample(builtin("voter", l8), l8, 1, {0.0, 10});
  } catch (const NoCoalescence&) {
    raised = true;
  }
  d << "; (ii) voter NoCoalescence: " << (raised ? "raised" : "NOT raised");
  // (iii)
  const auto l3 = segment(3);
  const auto noisy = builtin("noisy_contact", l3, {{"epsilon", 0.2}, {"lambda", 1.5}, {"death", 1.0}});
  const auto g = build_generator(noisy, l3);
  const auto pi = stationary(g).distribution;
  const std::size_t k = 10000;
  const auto batch = cftp_batch(noisy, l3, 500000, k, {}, 4);
  std::vector<double> freq(g.index.size(), 0.0);
  for (const auto& s : batch.samples) freq[g.index.encode(s.sample)] += 1.0 / static_cast<double>(k);
  double tv = 0.0;
  for (std::size_t i = 0; i < freq.size(); ++i) tv += std::abs(freq[i] - pi(static_cast<Eigen::Index>(i)));
  tv /= 2.0;
  d << "; (iii) noisy contact 3 sites TV " << std::setprecision(4) << tv << " over " << k << " samples";
  o.pass = all_empty && raised && tv < 0.05;
  o.detail = d.str();
  return o;
}

// ---------------------------------------------------------------- 9

Outcome simulator_law() {
  const auto lat = segment(3);
  const auto m = builtin("contact", lat);
  const auto g = build_generator(m, lat);
  const Configuration start(3, 1);
  Eigen::VectorXd p0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.index.size()));
  p0(static_cast<Eigen::Index>(g.index.encode(start))) = 1.0;
  const Eigen::RowVectorXd row = transition_matrix(g, 1.0).row(static_cast<Eigen::Index>(g.index.encode(start)));
  const std::size_t runs = 100000;
  std::vector<double> freq(g.index.size(), 0.0);
  for (std::size_t r = 0; r < runs; ++r) {
    const auto traj = evolve(start, build_event_stream(m, lat, 1.0, 9000000 + r), m, lat);
    freq[g.index.encode(traj.final)] += 1.0 / static_cast<double>(runs);
  }
  double tv = 0.0;
  for (std::size_t i = 0; i < freq.size(); ++i) tv += std::abs(freq[i] - row(static_cast<Eigen::Index>(i)));
  tv /= 2.0;
  std::ostringstream d;
  d << runs << " runs from (1 1 1) to t=1, TV " << std::setprecision(4) << tv;
  return {tv < 0.02, d.str()};
}

// ---------------------------------------------------------------- 10

Outcome determinism() {
  const auto root = fs::temp_directory_path() / ("ims_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  const std::string models = IMS_MODELS_DIR;
  const std::vector<std::pair<std::string, std::vector<std::string>>> runs{
      {"check", {"check", "builtin:two_type", "--search-orderings"}},
      {"simulate", {"simulate", models + "/gbt.json", "-T", "5", "-s", "3", "--events"}},
      {"couple", {"couple", "builtin:two_type", "-l", "2:free", "--lower", "0 2", "--upper", "1 2", "-T", "10"}},
      {"couple-param",
       {"couple", "builtin:contact", "-p", "lambda=1", "--upper-param", "lambda=2", "--lower", "bottom", "--upper",
        "top", "-T", "5"}},
      {"cftp", {"cftp", "builtin:noisy_contact", "-l", "8", "-n", "50", "-j", "3"}},
      {"oracle", {"oracle", "builtin:two_stage", "-l", "3:free"}},
      {"equivalence", {"equivalence", "--trials", "30", "-s", "5"}},
  };
  std::size_t identical = 0;
  std::string bad;
  for (const auto& [tag, args] : runs) {
    auto with_out = args;
    with_out.push_back("--out");
    with_out.push_back((root / tag).string());
    std::ostringstream out, err;
    const int code = cli::run(with_out, out, err);
    if (code == cli::kUsage) {
      bad += " " + tag + "(usage: " + err.str() + ")";
      continue;
    }
    std::ostringstream rout, rerr;
    const int rc = cli::run({"replay", (root / tag / "manifest.json").string()}, rout, rerr);
    if (rc == cli::kOk && rout.str().find("replay: byte-identical") != std::string::npos) {
      ++identical;
    } else {
      bad += " " + tag;
    }
  }
  fs::remove_all(root);
  Outcome o;
  o.pass = identical == runs.size();
  o.detail = std::to_string(identical) + "/" + std::to_string(runs.size()) + " recorded runs replay byte-identically";
  if (!bad.empty()) o.detail += "; failed:" + bad;
  return o;
}

}  // namespace

int main() {
  criterion(1, "map and system verdicts", 1.0, map_verdicts);
  criterion(2, "reordering fidelity", 1.0, reordering);
  criterion(3, "checker vs generator vs semigroup on random systems", 120.0, equivalence);
  criterion(4, "graphical coupling keeps ordered pairs ordered", 0.0, graphical_coupling);
  criterion(5, "basic coupling on 2 sites", 10.0, basic_coupling);
  criterion(6, "non-attractive model loses the order dynamically", 0.0, dynamic_counterexample);
  criterion(7, "parameter monotonicity of the contact process", 0.0, parameter_monotonicity);
  criterion(8, "coupling from the past", 300.0, cftp_exactness);
  criterion(9, "simulator law against the exact transition matrix", 120.0, simulator_law);
  criterion(10, "replay determinism of every subcommand", 0.0, determinism);
  std::cout << (failures ? std::to_string(failures) + " criterion(s) failed" : std::string("all criteria passed"))
            << std::endl;
  return failures ? 1 : 0;
}
