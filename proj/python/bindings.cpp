#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "ims/cftp.hpp"
#include "ims/model_io.hpp"
#include "ims/oracle.hpp"
#include "ims/simulator.hpp"

namespace py = pybind11;
using namespace ims;

namespace {

using Params = std::map<std::string, double>;

Configuration to_config(const std::vector<int>& values) {
  std::vector<ParticleType> v;
  v.reserve(values.size());
  for (int x : values) {
    if (x < 0 || x > kMaxN) throw DomainError("particle type " + std::to_string(x) + " out of range");
    v.push_back(static_cast<ParticleType>(x));
  }
  return Configuration(std::move(v));
}

std::vector<int> from_config(const Configuration& c) { return {c.values().begin(), c.values().end()}; }

std::vector<std::vector<int>> map_rows(const InteractionMap& j) {
  std::vector<std::vector<int>> rows(static_cast<std::size_t>(j.types()), std::vector<int>(j.types()));
  for (int b = 0; b < j.types(); ++b)
    for (int a = 0; a < j.types(); ++a) rows[b][a] = j(a, b);
  return rows;
}

std::vector<std::vector<double>> rate_rows(const RateTable& r) {
  const int t = r.n() + 1;
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(t), std::vector<double>(t));
  for (int b = 0; b < t; ++b)
    for (int a = 0; a < t; ++a) rows[b][a] = r(a, b);
  return rows;
}

py::dict verdict_dict(const AttractivenessVerdict& v) {
  py::list violations;
  for (const auto& x : v.violations) {
    py::dict d;
    d["condition"] = std::string(to_string(x.condition));
    d["first"] = py::make_tuple(x.first.a, x.first.b);
    d["second"] = py::make_tuple(x.second.a, x.second.b);
    d["layer"] = x.layer;
    d["detail"] = x.detail;
    violations.append(d);
  }
  py::dict out;
  out["attractive"] = v.attractive;
  out["violations"] = violations;
  return out;
}

// A model together with the lattice it lives on.
class PyModel {
 public:
  explicit PyModel(ModelDocument doc) : doc_(std::move(doc)), lattice_(doc_.lattice) {}

  static PyModel builtin(const std::string& name, const std::string& lattice, const Params& params,
                         const std::string& kernel) {
    const auto k = kernel.empty() ? Kernel::nearest_neighbor() : parse_kernel_spec(kernel);
    return PyModel(builtin_document(name, params, parse_lattice_spec(lattice, k)));
  }

  static PyModel from_json(const std::string& text, const std::optional<std::string>& lattice, const Params& params) {
    std::optional<LatticeSpec> spec;
    if (lattice) spec = parse_lattice_spec(*lattice);
    return PyModel(parse_model_file(text, spec, params));
  }

  static PyModel from_file(const std::string& path, const std::optional<std::string>& lattice, const Params& params) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DomainError("cannot read " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return from_json(os.str(), lattice, params);
  }

  const ModelSpec& spec() const { return doc_.model; }
  const Lattice& lattice() const { return lattice_; }
  const ModelDocument& doc() const { return doc_; }

 private:
  ModelDocument doc_;
  Lattice lattice_;
};

Configuration initial_state(const PyModel& m, const py::object& init) {
  const auto [bottom, top] = extremal(m.spec(), m.lattice());
  if (py::isinstance<py::str>(init)) {
    const auto s = init.cast<std::string>();
    if (s == "bottom") return bottom;
    if (s == "top") return top;
    return parse_configuration(s, m.spec().n(), m.lattice().sites());
  }
  auto c = to_config(init.cast<std::vector<int>>());
  if (c.size() != m.lattice().sites()) throw DomainError("configuration size does not match the lattice");
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "Interaction map systems: attractiveness checks, simulation, exact oracles and CFTP";

  py::register_exception<DomainError>(mod, "DomainError", PyExc_ValueError);
  py::register_exception<CapacityError>(mod, "CapacityError", PyExc_MemoryError);
  py::register_exception<PreconditionError>(mod, "PreconditionError", PyExc_RuntimeError);
  py::register_exception<NoCoalescence>(mod, "NoCoalescence", PyExc_RuntimeError);
  py::register_exception<CftpBatchError>(mod, "CftpBatchError", PyExc_RuntimeError);

  mod.def("builtin_names", &builtin_names);
  mod.def("builtin_defaults", &builtin_defaults, py::arg("name"));
  mod.def("reference_map_names", &reference_map_names);
  mod.def("reference_map", [](const std::string& name) { return map_rows(reference_map(name)); }, py::arg("name"),
          "Interaction map as rows[b][a].");
  mod.def(
      "check_map",
      [](const std::vector<std::vector<int>>& rows) {
        return verdict_dict(check_map_attractive(InteractionMap::from_rows(rows)));
      },
      py::arg("rows"), "Attractiveness of a bare interaction map given as rows[b][a].");

  py::class_<PyModel>(mod, "Model")
      .def_static("builtin", &PyModel::builtin, py::arg("name"), py::arg("lattice") = "16",
                  py::arg("params") = Params{}, py::arg("kernel") = "")
      .def_static("from_json", &PyModel::from_json, py::arg("text"), py::arg("lattice") = py::none(),
                  py::arg("params") = Params{})
      .def_static("from_file", &PyModel::from_file, py::arg("path"), py::arg("lattice") = py::none(),
                  py::arg("params") = Params{})
      .def_property_readonly("n", [](const PyModel& m) { return m.spec().n(); })
      .def_property_readonly("labels", [](const PyModel& m) { return m.spec().labels(); })
      .def_property_readonly("sites", [](const PyModel& m) { return m.lattice().sites(); })
      .def_property_readonly("lattice", [](const PyModel& m) { return m.lattice().spec().describe(); })
      .def_property_readonly("kernel_mass", [](const PyModel& m) { return m.lattice().max_mass(); })
      .def_property_readonly("parameters", [](const PyModel& m) { return m.doc().parameters; })
      .def_property_readonly("layers",
                             [](const PyModel& m) {
                               py::list out;
                               for (const auto& l : m.spec().layers()) {
                                 out.append(py::make_tuple(map_rows(l.map), rate_rows(l.rates)));
                               }
                               return out;
                             })
      .def("to_json", [](const PyModel& m) { return serialize_model(m.doc()); })
      .def("check", [](const PyModel& m) { return verdict_dict(check_ims_attractive(m.spec())); })
      .def("search_orderings",
           [](const PyModel& m) {
             std::vector<std::vector<int>> out;
             for (const auto& p : search_orderings(m.spec())) out.push_back(p.image());
             return out;
           })
      .def(
          "simulate",
          [](const PyModel& m, double horizon, std::uint64_t seed, const py::object& init) {
            const auto stream = build_event_stream(m.spec(), m.lattice(), horizon, seed);
            const auto traj = evolve(initial_state(m, init), stream, m.spec(), m.lattice());
            py::list transitions;
            for (const auto& t : traj.transitions) {
              transitions.append(py::make_tuple(t.t, t.site, int(t.before), int(t.after)));
            }
            py::dict out;
            out["initial"] = from_config(traj.initial);
            out["final"] = from_config(traj.final);
            out["transitions"] = transitions;
            return out;
          },
          py::arg("horizon"), py::arg("seed") = 1, py::arg("init") = py::str("top"),
          "Runs the graphical representation; transitions are (t, site, from, to).")
      .def(
          "couple",
          [](const PyModel& m, const py::object& lower, const py::object& upper, double horizon, std::uint64_t seed) {
            const auto run = coupled_evolve({initial_state(m, lower), initial_state(m, upper)},
                                            build_event_stream(m.spec(), m.lattice(), horizon, seed), m.spec(),
                                            m.lattice());
            py::dict out;
            out["lower"] = from_config(run.trajectories[0].final);
            out["upper"] = from_config(run.trajectories[1].final);
            out["broken"] = !run.breaks.empty();
            out["break"] = run.breaks.empty() ? std::string() : run.breaks.front().describe();
            return out;
          },
          py::arg("lower"), py::arg("upper"), py::arg("horizon"), py::arg("seed") = 1)
      .def(
          "cftp",
          [](const PyModel& m, std::size_t samples, std::uint64_t seed, unsigned threads, int max_epochs) {
            std::vector<std::vector<int>> out;
            CftpBatch batch;
            {
              py::gil_scoped_release release;
              batch = cftp_batch(m.spec(), m.lattice(), seed, samples, {0.0, max_epochs}, threads);
            }
            for (const auto& s : batch.samples) out.push_back(from_config(s.sample));
            return out;
          },
          py::arg("samples"), py::arg("seed") = 1, py::arg("threads") = 1, py::arg("max_epochs") = 24,
          "Exact stationary samples; sample i uses seed + i.")
      .def("generator",
           [](const PyModel& m) {
             const auto g = build_generator(m.spec(), m.lattice());
             std::vector<std::vector<int>> states;
             for (std::size_t s = 0; s < g.index.size(); ++s) states.push_back(from_config(g.index.decode(s)));
             return py::make_tuple(g.q, states);
           },
           "Dense generator Q and the state list (site 0 most significant).")
      .def("transition_matrix",
           [](const PyModel& m, double t) { return transition_matrix(build_generator(m.spec(), m.lattice()), t); },
           py::arg("t"))
      .def("stationary",
           [](const PyModel& m) {
             const auto st = stationary(build_generator(m.spec(), m.lattice()));
             return py::make_tuple(st.distribution, st.unique);
           })
      .def("generator_monotone", [](const PyModel& m) {
        const auto g = build_generator(m.spec(), m.lattice());
        return generator_monotone(g, enumerate_upsets(g.index)).monotone;
      });

  mod.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs an imsctl command in-process and returns (exit code, stdout, stderr).");
}
