#include "dataset.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>

#include <censreg/error.hpp>

namespace censreg::cli {

namespace {

constexpr Model kModels[] = {Model::Tobit1, Model::Tobit2, Model::Tobit3, Model::Aft};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

[[noreturn]] void parse_error(const std::string& source, std::size_t line, const std::string& what) {
  throw Error(ErrorCode::ParseError, source + ":" + std::to_string(line) + ": " + what);
}

// Column roles by model.
enum class Role { Response1, Response2, Selection, FailTime, Period, X1, X2, Unknown };

Role classify(Model model, std::string_view name) {
  switch (model) {
    case Model::Tobit1:
      if (name == "y") return Role::Response1;
      if (starts_with(name, "x") && name.size() > 1) return Role::X1;
      break;
    case Model::Aft:
      if (name == "t") return Role::FailTime;
      if (name == "T") return Role::Period;
      if (starts_with(name, "x") && name.size() > 1) return Role::X1;
      break;
    case Model::Tobit3:
      if (name == "y1") return Role::Response1;
      if (name == "y2") return Role::Response2;
      if (starts_with(name, "x1_") && name.size() > 3) return Role::X1;
      if (starts_with(name, "x2_") && name.size() > 3) return Role::X2;
      break;
    case Model::Tobit2:
      if (name == "z") return Role::Selection;
      if (name == "y2") return Role::Response2;
      if (starts_with(name, "x1_") && name.size() > 3) return Role::X1;
      if (starts_with(name, "x2_") && name.size() > 3) return Role::X2;
      break;
  }
  return Role::Unknown;
}

std::vector<std::pair<Role, const char*>> required_columns(Model model) {
  switch (model) {
    case Model::Tobit1: return {{Role::Response1, "y"}, {Role::X1, "x1"}};
    case Model::Aft: return {{Role::FailTime, "t"}, {Role::Period, "T"}, {Role::X1, "x1"}};
    case Model::Tobit3: return {{Role::Response1, "y1"}, {Role::Response2, "y2"}, {Role::X1, "x1_*"}, {Role::X2, "x2_*"}};
    case Model::Tobit2: return {{Role::Selection, "z"}, {Role::Response2, "y2"}, {Role::X1, "x1_*"}, {Role::X2, "x2_*"}};
  }
  return {};
}

std::optional<double> parse_double(std::string_view cell) {
  double v = 0.0;
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) return std::nullopt;
  return v;
}

}  // namespace

std::string_view to_string(Model model) {
  switch (model) {
    case Model::Tobit1: return "tobit1";
    case Model::Tobit2: return "tobit2";
    case Model::Tobit3: return "tobit3";
    case Model::Aft: return "aft";
  }
  return "?";
}

Model parse_model(std::string_view name) {
  for (auto m : kModels) {
    if (name == to_string(m)) return m;
  }
  throw Error(ErrorCode::InvalidArgument,
              "unknown model '" + std::string(name) + "' (expected tobit1, tobit2, tobit3 or aft)");
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

Dataset read_dataset(std::istream& in, Model model, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  // skip leading blank lines
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) parse_error(source, line_no, "empty file, expected a header row");

  const auto header_cells = split(line);
  std::vector<std::string> header(header_cells.begin(), header_cells.end());
  std::vector<Role> roles;
  std::map<std::string, std::size_t> seen;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c].empty()) parse_error(source, line_no, "column " + std::to_string(c + 1) + " has an empty name");
    if (!seen.emplace(header[c], c).second) parse_error(source, line_no, "duplicate column '" + header[c] + "'");
    const Role r = classify(model, header[c]);
    if (r == Role::Unknown) {
      parse_error(source, line_no,
                  "unexpected column '" + header[c] + "' for model " + std::string(to_string(model)));
    }
    roles.push_back(r);
  }
  for (const auto& [role, name] : required_columns(model)) {
    bool found = false;
    for (auto r : roles) found |= r == role;
    if (!found) parse_error(source, line_no, "missing required column '" + std::string(name) + "'");
  }

  Dataset ds;
  ds.model = model;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (roles[c] == Role::X1) ds.x1_names.push_back(header[c]);
    if (roles[c] == Role::X2) ds.x2_names.push_back(header[c]);
  }

  // row-major buffers filled per role
  std::vector<double> r1, r2, sel, ft, per, x1, x2;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      parse_error(source, line_no,
                  "expected " + std::to_string(header.size()) + " fields, found " + std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v;
      if (roles[c] == Role::Response2 && model == Model::Tobit2 && (cells[c].empty() || cells[c] == "NA")) {
        v = std::nan("");
      } else if (auto parsed = parse_double(cells[c]); parsed && std::isfinite(*parsed)) {
        v = *parsed;
      } else {
        parse_error(source, line_no,
                    "column '" + header[c] + "': cannot read '" + std::string(cells[c]) + "' as a finite number");
      }
      switch (roles[c]) {
        case Role::Response1: r1.push_back(v); break;
        case Role::Response2: r2.push_back(v); break;
        case Role::Selection:
          if (v != 0.0 && v != 1.0) {
            throw Error(ErrorCode::InvariantViolation, "z must be 0 or 1 at row " + std::to_string(ds.rows + 1));
          }
          sel.push_back(v);
          break;
        case Role::FailTime: ft.push_back(v); break;
        case Role::Period: per.push_back(v); break;
        case Role::X1: x1.push_back(v); break;
        case Role::X2: x2.push_back(v); break;
        case Role::Unknown: break;
      }
    }
    ++ds.rows;
  }
  if (ds.rows == 0) parse_error(source, line_no, "no data rows");

  const auto n = static_cast<Eigen::Index>(ds.rows);
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const auto matrix = [n](const std::vector<double>& buf, std::size_t cols) -> Eigen::MatrixXd {
    return Eigen::Map<const RowMajor>(buf.data(), n, static_cast<Eigen::Index>(cols));
  };
  const auto vector = [n](const std::vector<double>& buf) -> Eigen::VectorXd {
    return Eigen::Map<const Eigen::VectorXd>(buf.data(), n);
  };

  switch (model) {
    case Model::Tobit1:
      ds.tobit1 = {matrix(x1, ds.x1_names.size()), vector(r1)};
      validate(ds.tobit1);
      break;
    case Model::Aft: {
      Eigen::VectorXd y;
      try {
        y = aft_transform(vector(ft), vector(per));
      } catch (const Error& e) {
        throw Error(ErrorCode::InvariantViolation, e.what());
      }
      ds.tobit1 = {matrix(x1, ds.x1_names.size()), y};
      validate(ds.tobit1);
      break;
    }
    case Model::Tobit3:
      ds.tobit3 = {matrix(x1, ds.x1_names.size()), vector(r1), matrix(x2, ds.x2_names.size()), vector(r2)};
      validate(ds.tobit3);
      break;
    case Model::Tobit2: {
      ds.tobit2.X1 = matrix(x1, ds.x1_names.size());
      ds.tobit2.X2 = matrix(x2, ds.x2_names.size());
      ds.tobit2.y2 = vector(r2);
      ds.tobit2.z.resize(ds.rows);
      for (std::size_t i = 0; i < ds.rows; ++i) ds.tobit2.z[i] = sel[i] != 0.0 ? 1 : 0;
      validate(ds.tobit2);
      break;
    }
  }

  const Eigen::VectorXd* censor_by = model == Model::Tobit3 ? &ds.tobit3.y1 : &ds.tobit1.y;
  if (model == Model::Tobit2) {
    for (auto v : ds.tobit2.z) ds.censored += v == 0;
  } else {
    for (Eigen::Index i = 0; i < censor_by->size(); ++i) ds.censored += (*censor_by)[i] == 0.0;
  }
  return ds;
}

Dataset load_csv(const std::string& path, Model model) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
  return read_dataset(in, model, path);
}

}  // namespace censreg::cli
