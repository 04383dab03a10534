#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include <censreg/two_step.hpp>

namespace censreg::cli {

enum class Model { Tobit1, Tobit2, Tobit3, Aft };

std::string_view to_string(Model model);
/// "tobit1", "tobit2", "tobit3" or "aft"; anything else is InvalidArgument.
Model parse_model(std::string_view name);

/// A validated dataset for one model. AFT data is stored in `tobit1` after the
/// log transform; only the member matching `model` is filled.
struct Dataset {
  Model model = Model::Tobit1;
  std::size_t rows = 0;
  std::size_t censored = 0;
  // Covariate names in column order: x1_names for tobit1/aft and the selection
  // equation, x2_names for the outcome equation.
  std::vector<std::string> x1_names;
  std::vector<std::string> x2_names;
  Tobit1Data tobit1;
  Tobit3Data tobit3;
  Tobit2Data tobit2;
};

/// Reads a CSV with a header row. Required columns:
///   tobit1: y and covariates x*        tobit3: y1, y2, x1_*, x2_*
///   tobit2: z, y2, x1_*, x2_*         aft:    t, T, x*
/// Columns may come in any order; other names are rejected. In tobit2 files y2
/// may be empty or NA where z = 0.
///
/// Throws ParseError (bad file, header or cell, with line and column) or
/// InvariantViolation / AllSameLabel from the model's validation.
Dataset read_dataset(std::istream& in, Model model, const std::string& source = "<input>");
Dataset load_csv(const std::string& path, Model model);

/// %.17g, with inf / -inf / nan spelled out.
std::string format_number(double value);

}  // namespace censreg::cli
