#pragma once

// JSON model files and the built-in model catalog.
//
// Matrices in model files are written the way the usual printed tables are:
// row b (the neighbor), column a (the affected particle), so entry [b][a]
// holds J(a, b) or lambda_{ab}.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ims/core.hpp"
#include "ims/lattice.hpp"

namespace ims {

inline constexpr int kModelSchemaVersion = 1;

struct ModelDocument {
  std::string name;
  ModelSpec model;
  LatticeSpec lattice;
  std::map<std::string, double> parameters;
};

/// Parses and validates a model file. Rate entries may be numbers, null
/// (no interaction) or arithmetic expressions over the file's parameters and
/// W, the largest kernel mass of any site on the lattice. The lattice comes
/// from the file unless `lattice_override` is given. `parameter_overrides`
/// replace values of parameters the file declares.
ModelDocument parse_model_file(std::string_view text, const std::optional<LatticeSpec>& lattice_override = {},
                               const std::map<std::string, double>& parameter_overrides = {});

/// Numeric (fully resolved) JSON form; parse_model_file reads it back to an
/// identical model.
std::string serialize_model(const ModelDocument& doc);

/// "8", "8:free", "4x4", "4x4:periodic".
LatticeSpec parse_lattice_spec(std::string_view text, Kernel kernel = Kernel::nearest_neighbor());

/// "nn", "nn:0.5", "box:2", "complete".
Kernel parse_kernel_spec(std::string_view text);

/// Evaluates + - * / and parentheses over named values.
double evaluate_rate_expression(std::string_view expr, const std::map<std::string, double>& names);

// ---------------------------------------------------------------- catalog

std::vector<std::string> builtin_names();

/// Parameter names and default values for a built-in model.
std::map<std::string, double> builtin_defaults(const std::string& name);

/// Built-in model; every parameter of the model must be supplied. Constant
/// (neighbor-independent) rates rho are spread as rho / kernel_mass per neighbor.
ModelSpec builtin_model(const std::string& name, const std::map<std::string, double>& params, double kernel_mass);

/// Defaults overlaid with `overrides`; W taken from the lattice.
ModelDocument builtin_document(const std::string& name, const std::map<std::string, double>& overrides,
                               const LatticeSpec& lattice);

/// Named interaction maps: "contact", "voter", "two_type",
/// "two_type_modified_a", "two_type_modified_b", "two_type_modified_c",
/// "two_type_reordered", "gbt_base" and "gbt_tree_birth". The three
/// "modified" maps change how species 2 acts on the pairs (1,2) and (2,2).
InteractionMap reference_map(const std::string& name);
std::vector<std::string> reference_map_names();

}  // namespace ims
