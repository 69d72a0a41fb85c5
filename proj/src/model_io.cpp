#include "ims/model_io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

#include "json.hpp"

namespace ims {

using json = nlohmann::json;

namespace {

class ExpressionParser {
 public:
  ExpressionParser(std::string_view text, const std::map<std::string, double>& names) : s_(text), names_(names) {}

  double parse() {
    const double v = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw DomainError("rate expression \"" + std::string(s_) + "\": " + why);
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  double expr() {
    double v = term();
    for (;;) {
      if (eat('+')) v += term();
      else if (eat('-')) v -= term();
      else return v;
    }
  }
  double term() {
    double v = factor();
    for (;;) {
      if (eat('*')) {
        v *= factor();
      } else if (eat('/')) {
        const double d = factor();
        if (d == 0.0) fail("division by zero");
        v /= d;
      } else {
        return v;
      }
    }
  }
  double factor() {
    skip();
    if (eat('(')) {
      const double v = expr();
      if (!eat(')')) fail("missing ')'");
      return v;
    }
    if (eat('-')) return -factor();
    if (pos_ >= s_.size()) fail("unexpected end");
    const char c = s_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const auto start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      const std::string name(s_.substr(start, pos_ - start));
      const auto it = names_.find(name);
      if (it == names_.end()) fail("undefined parameter '" + name + "'");
      return it->second;
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
    if (ec != std::errc()) fail("expected a number or parameter at offset " + std::to_string(pos_));
    pos_ = static_cast<std::size_t>(ptr - s_.data());
    return v;
  }

  std::string_view s_;
  const std::map<std::string, double>& names_;
  std::size_t pos_ = 0;
};

std::string where(std::size_t layer, const char* field, std::size_t row, std::size_t col) {
  return "layers[" + std::to_string(layer) + "]." + field + " row " + std::to_string(row) + " column " +
         std::to_string(col);
}

Kernel kernel_from_json(const json& k) {
  const auto kind = k.value("kind", std::string("nearest-neighbor"));
  const double w = k.value("weight", 1.0);
  if (kind == "nearest-neighbor" || kind == "nn") return Kernel::nearest_neighbor(w);
  if (kind == "box") return Kernel::box(k.at("range").get<int>(), w);
  if (kind == "complete") return Kernel::complete(w);
  if (kind == "offsets") {
    std::vector<KernelOffset> offs;
    for (const auto& o : k.at("offsets")) {
      if (!o.is_array() || o.size() < 2 || o.size() > 3) throw DomainError("kernel offsets are [dx, dy] or [dx, dy, weight]");
      offs.push_back({o[0].get<int>(), o[1].get<int>(), o.size() == 3 ? o[2].get<double>() : 1.0});
    }
    return Kernel::offsets(std::move(offs));
  }
  throw DomainError("unknown kernel kind '" + kind + "'");
}

json kernel_to_json(const Kernel& k) {
  json j;
  j["kind"] = std::string(to_string(k.kind()));
  switch (k.kind()) {
    case KernelKind::Box:
      j["range"] = k.range();
      j["weight"] = k.weight();
      break;
    case KernelKind::Offsets: {
      json offs = json::array();
      for (const auto& o : k.explicit_offsets()) offs.push_back({o.dx, o.dy, o.weight});
      j["offsets"] = offs;
      break;
    }
    default:
      j["weight"] = k.weight();
  }
  return j;
}

Boundary boundary_from(std::string_view s) {
  if (s == "periodic") return Boundary::Periodic;
  if (s == "free") return Boundary::Free;
  throw DomainError("boundary must be 'periodic' or 'free', got '" + std::string(s) + "'");
}

LatticeSpec lattice_from_json(const json& l, Kernel kernel) {
  LatticeSpec spec;
  spec.sides = l.at("sides").get<std::vector<int>>();
  spec.boundary = boundary_from(l.value("boundary", std::string("periodic")));
  spec.kernel = std::move(kernel);
  return spec;
}

}  // namespace

double evaluate_rate_expression(std::string_view expr, const std::map<std::string, double>& names) {
  return ExpressionParser(expr, names).parse();
}

ModelDocument parse_model_file(std::string_view text, const std::optional<LatticeSpec>& lattice_override,
                               const std::map<std::string, double>& parameter_overrides) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DomainError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    const int schema = doc.value("schema", kModelSchemaVersion);
    if (schema != kModelSchemaVersion) {
      throw DomainError("unsupported model schema version " + std::to_string(schema));
    }
    const int n = doc.at("n").get<int>();
    if (n < 1 || n > kMaxN) throw DomainError("n must be in [1, " + std::to_string(kMaxN) + "]");
    const auto types = static_cast<std::size_t>(n + 1);

    Kernel kernel = doc.contains("kernel") ? kernel_from_json(doc["kernel"]) : Kernel::nearest_neighbor();
    LatticeSpec lattice;
    if (lattice_override) {
      lattice = *lattice_override;
    } else if (doc.contains("lattice")) {
      lattice = lattice_from_json(doc["lattice"], kernel);
    } else {
      lattice = LatticeSpec{{32}, Boundary::Periodic, kernel};
    }

    std::map<std::string, double> params;
    if (doc.contains("parameters")) {
      for (const auto& [k, v] : doc["parameters"].items()) {
        if (k == "W") throw DomainError("parameter name 'W' is reserved for the kernel mass");
        params[k] = v.get<double>();
      }
    }
    for (const auto& [k, v] : parameter_overrides) {
      if (!params.count(k)) throw DomainError("model file declares no parameter '" + k + "'");
      params[k] = v;
    }
    auto names = params;
    names["W"] = Lattice(lattice).max_mass();

    std::vector<std::string> labels;
    if (doc.contains("labels")) labels = doc["labels"].get<std::vector<std::string>>();

    const auto& layers_json = doc.at("layers");
    if (!layers_json.is_array() || layers_json.empty()) throw DomainError("'layers' must be a nonempty array");
    std::vector<Layer> layers;
    for (std::size_t li = 0; li < layers_json.size(); ++li) {
      const auto& lj = layers_json[li];
      const auto& mj = lj.at("map");
      const auto& rj = lj.at("rates");
      if (!mj.is_array() || mj.size() != types) {
        throw DomainError("layers[" + std::to_string(li) + "].map must have " + std::to_string(types) + " rows");
      }
      if (!rj.is_array() || rj.size() != types) {
        throw DomainError("layers[" + std::to_string(li) + "].rates must have " + std::to_string(types) + " rows");
      }
      std::vector<ParticleType> map(types * types);
      std::vector<double> rates(types * types);
      for (std::size_t b = 0; b < types; ++b) {
        if (!mj[b].is_array() || mj[b].size() != types) {
          throw DomainError("layers[" + std::to_string(li) + "].map row " + std::to_string(b) + " must have " +
                            std::to_string(types) + " columns");
        }
        if (!rj[b].is_array() || rj[b].size() != types) {
          throw DomainError("layers[" + std::to_string(li) + "].rates row " + std::to_string(b) + " must have " +
                            std::to_string(types) + " columns");
        }
        for (std::size_t a = 0; a < types; ++a) {
          const auto& m = mj[b][a];
          if (!m.is_number_integer() && !m.is_number_unsigned()) {
            throw DomainError(where(li, "map", b, a) + ": map entries must be integers");
          }
          const auto v = m.get<long long>();
          if (v < 0 || v > n) {
            throw DomainError(where(li, "map", b, a) + ": entry " + std::to_string(v) + " outside [0, " +
                              std::to_string(n) + "]");
          }
          map[a * types + b] = static_cast<ParticleType>(v);

          const auto& r = rj[b][a];
          double rate = 0.0;
          if (r.is_null()) {
            rate = 0.0;
          } else if (r.is_number()) {
            rate = r.get<double>();
          } else if (r.is_string()) {
            try {
              rate = evaluate_rate_expression(r.get<std::string>(), names);
            } catch (const DomainError& e) {
              throw DomainError(where(li, "rates", b, a) + ": " + e.what());
            }
          } else {
            throw DomainError(where(li, "rates", b, a) + ": rates must be numbers, null or expressions");
          }
          if (!(rate >= 0.0) || !std::isfinite(rate)) {
            throw DomainError(where(li, "rates", b, a) + ": negative or non-finite rate");
          }
          rates[a * types + b] = rate;
        }
      }
      layers.push_back({InteractionMap(n, std::move(map)), RateTable(n, std::move(rates))});
    }
    return ModelDocument{doc.value("name", std::string()), ModelSpec(n, std::move(layers), std::move(labels)),
                         std::move(lattice), std::move(params)};
  } catch (const json::exception& e) {
    throw DomainError(std::string("model file: ") + e.what());
  }
}

std::string serialize_model(const ModelDocument& d) {
  const auto& m = d.model;
  const auto types = static_cast<std::size_t>(m.n() + 1);
  json doc;
  doc["schema"] = kModelSchemaVersion;
  if (!d.name.empty()) doc["name"] = d.name;
  doc["n"] = m.n();
  doc["labels"] = m.labels();
  doc["parameters"] = json::object();
  for (const auto& [k, v] : d.parameters) doc["parameters"][k] = v;
  doc["kernel"] = kernel_to_json(d.lattice.kernel);
  doc["lattice"] = {{"sides", d.lattice.sides}, {"boundary", std::string(to_string(d.lattice.boundary))}};
  json layers = json::array();
  for (const auto& layer : m.layers()) {
    json map = json::array();
    json rates = json::array();
    for (std::size_t b = 0; b < types; ++b) {
      json mrow = json::array();
      json rrow = json::array();
      for (std::size_t a = 0; a < types; ++a) {
        mrow.push_back(layer.map(static_cast<int>(a), static_cast<int>(b)));
        rrow.push_back(layer.rates(static_cast<int>(a), static_cast<int>(b)));
      }
      map.push_back(mrow);
      rates.push_back(rrow);
    }
    layers.push_back({{"map", map}, {"rates", rates}});
  }
  doc["layers"] = layers;
  return doc.dump(2) + "\n";
}

LatticeSpec parse_lattice_spec(std::string_view text, Kernel kernel) {
  LatticeSpec spec;
  spec.kernel = std::move(kernel);
  std::string_view dims = text;
  if (const auto colon = text.find(':'); colon != std::string_view::npos) {
    dims = text.substr(0, colon);
    spec.boundary = boundary_from(text.substr(colon + 1));
  }
  std::size_t pos = 0;
  while (pos <= dims.size()) {
    const auto x = dims.find('x', pos);
    const auto part = dims.substr(pos, x == std::string_view::npos ? std::string_view::npos : x - pos);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc() || ptr != part.data() + part.size() || part.empty()) {
      throw DomainError("lattice spec '" + std::string(text) + "': expected sides like 8, 8:free or 4x4:periodic");
    }
    spec.sides.push_back(v);
    if (x == std::string_view::npos) break;
    pos = x + 1;
  }
  Lattice check(spec);  // validates sides and dimension
  (void)check;
  return spec;
}

Kernel parse_kernel_spec(std::string_view text) {
  const auto colon = text.find(':');
  const auto kind = text.substr(0, colon);
  const auto arg = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  auto number = [&](std::string_view s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw DomainError("kernel spec '" + std::string(text) + "': bad number '" + std::string(s) + "'");
    }
    return v;
  };
  if (kind == "nn") return Kernel::nearest_neighbor(arg.empty() ? 1.0 : number(arg));
  if (kind == "complete") return Kernel::complete(arg.empty() ? 1.0 : number(arg));
  if (kind == "box") {
    if (arg.empty()) throw DomainError("box kernel needs a range, e.g. box:2");
    return Kernel::box(static_cast<int>(number(arg)));
  }
  throw DomainError("unknown kernel '" + std::string(text) + "' (nn, nn:W, box:R, complete)");
}

}  // namespace ims
