#pragma once

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "polysamp/common.hpp"
#include "polysamp/diagnostics.hpp"
#include "polysamp/linalg.hpp"
#include "polysamp/model.hpp"
#include "polysamp/walks.hpp"

namespace polysamp {

// ---------------------------------------------------------------------------
// Native polytope text format
//
//   #form K1|K2
//   #dims d n k
//   #A
//   row col value        (0-indexed coordinate triplets)
//   #b
//   value                (one per line)
//
// Values are written in shortest-round-trip decimal, so load(save(p))
// reproduces every coefficient bit for bit.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, Index line) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last)
    throw ParseError("bad number '" + std::string(s) + "'", line);
  return v;
}

inline long long parse_int(std::string_view s, Index line) {
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ParseError("bad integer '" + std::string(s) + "'", line);
  return v;
}

inline std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

inline void write_polytope_body(std::ostream& os, const char* form, Index d,
                                Index n, Index k,
                                const std::vector<Triplet>& triplets,
                                const Vector& b) {
  os << "#form " << form << "\n";
  os << "#dims " << d << " " << n << " " << k << "\n";
  os << "#A\n";
  for (const Triplet& t : triplets)
    os << t.row() << " " << t.col() << " " << format_double(t.value()) << "\n";
  os << "#b\n";
  for (Index i = 0; i < b.size(); ++i) os << format_double(b[i]) << "\n";
}

}  // namespace detail

inline void save_polytope(const ConstrainedPolytope& p, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  detail::write_polytope_body(os, "K2", p.dim(), p.rows(), p.k,
                              to_triplets(p.A), p.b);
  if (!os.flush()) throw IoError("write failed for '" + path + "'");
}

inline void save_polytope(const FullDimPolytope& f, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  std::vector<Triplet> triplets;
  for (Index i = 0; i < f.A.rows(); ++i)
    for (Index j = 0; j < f.A.cols(); ++j)
      if (f.A(i, j) != 0.0) triplets.emplace_back(i, j, f.A(i, j));
  detail::write_polytope_body(os, "K1", f.dim(), 0, f.facets(), triplets, f.b);
  if (!os.flush()) throw IoError("write failed for '" + path + "'");
}

struct LoadedPolytope {
  PolytopeForm form = PolytopeForm::dense_k1;
  FullDimPolytope dense;       // filled when form == dense_k1
  ConstrainedPolytope sparse;  // filled when form == sparse_k2
};

inline LoadedPolytope load_polytope(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "'");

  std::string form;
  Index d = -1, n = -1, k = -1;
  std::vector<Triplet> triplets;
  std::vector<double> bvals;
  enum class Section { none, matrix, rhs } section = Section::none;

  std::string line;
  Index lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto toks = detail::split_ws(line);
    if (toks.empty()) continue;
    if (toks[0] == "#form") {
      if (toks.size() != 2 || (toks[1] != "K1" && toks[1] != "K2"))
        throw ParseError("expected '#form K1|K2'", lineno);
      form = toks[1];
    } else if (toks[0] == "#dims") {
      if (toks.size() != 4) throw ParseError("expected '#dims d n k'", lineno);
      d = detail::parse_int(toks[1], lineno);
      n = detail::parse_int(toks[2], lineno);
      k = detail::parse_int(toks[3], lineno);
    } else if (toks[0] == "#A") {
      section = Section::matrix;
    } else if (toks[0] == "#b") {
      section = Section::rhs;
    } else if (toks[0][0] == '#') {
      throw ParseError("unknown section '" + toks[0] + "'", lineno);
    } else if (section == Section::matrix) {
      if (toks.size() != 3)
        throw ParseError("expected 'row col value'", lineno);
      triplets.emplace_back(detail::parse_int(toks[0], lineno),
                            detail::parse_int(toks[1], lineno),
                            detail::parse_double(toks[2], lineno));
    } else if (section == Section::rhs) {
      if (toks.size() != 1) throw ParseError("expected one value", lineno);
      bvals.push_back(detail::parse_double(toks[0], lineno));
    } else {
      throw ParseError("data before any section header", lineno);
    }
  }
  if (form.empty()) throw ParseError("missing #form section", lineno);
  if (d < 0) throw ParseError("missing #dims section", lineno);

  LoadedPolytope out;
  Vector b(static_cast<Index>(bvals.size()));
  for (std::size_t i = 0; i < bvals.size(); ++i) b[static_cast<Index>(i)] = bvals[i];
  if (form == "K2") {
    out.form = PolytopeForm::sparse_k2;
    if (Index(bvals.size()) != n)
      throw ParseError("#b length does not match n", lineno);
    out.sparse.A = from_triplets(n, d, triplets);
    out.sparse.b = b;
    out.sparse.k = k;
    out.sparse.check();
  } else {
    out.form = PolytopeForm::dense_k1;
    if (Index(bvals.size()) != k)
      throw ParseError("#b length does not match k", lineno);
    DenseMatrix A = DenseMatrix::Zero(k, d);
    for (const Triplet& t : triplets) {
      if (t.row() < 0 || t.row() >= k || t.col() < 0 || t.col() >= d)
        throw ParseError("triplet outside matrix bounds", lineno);
      A(t.row(), t.col()) = t.value();
    }
    out.dense = make_full_dim(std::move(A), std::move(b));
  }
  return out;
}

// ---------------------------------------------------------------------------
// MPS subset parser (ROWS / COLUMNS / RHS / BOUNDS, free format)
// ---------------------------------------------------------------------------

struct MpsRow {
  char type = 'N';  // N, E, L, G
  std::string name;
};

struct MpsEntry {
  std::string column;
  std::string row;
  double value = 0.0;
};

struct MpsRhsEntry {
  std::string row;
  double value = 0.0;
};

struct MpsBound {
  std::string type;  // LO, UP, FX, FR
  std::string column;
  double value = 0.0;  // unused for FR
};

struct MpsModel {
  std::string name;
  std::vector<MpsRow> rows;
  std::vector<MpsEntry> entries;
  std::vector<MpsRhsEntry> rhs;
  std::vector<MpsBound> bounds;
  std::vector<std::string> column_order;
};

inline MpsModel parse_mps(const std::string& text) {
  MpsModel m;
  std::set<std::string> row_names, column_seen;
  std::set<std::pair<std::string, std::string>> entry_seen;
  std::set<std::string> rhs_seen;
  std::set<std::pair<std::string, std::string>> bound_seen;
  Index objective_rows = 0;

  enum class Section { none, rows, columns, rhs, bounds, done };
  Section section = Section::none;

  const auto parse_num = [](const std::string& tok, Index line) {
    // MPS numbers may carry Fortran-style forms like 1.0D2; strtod after a
    // D -> E rewrite covers the NetLib corpus.
    std::string s = tok;
    for (char& c : s)
      if (c == 'D' || c == 'd') c = 'e';
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size())
      throw ParseError("bad number '" + tok + "'", line);
    return v;
  };

  std::istringstream is(text);
  std::string line;
  Index lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line[0] == '*') continue;  // comment
    const auto toks = detail::split_ws(line);
    if (toks.empty()) continue;

    // Section headers start in column one; data records are indented. The
    // distinction matters because RHS set names are conventionally "RHS".
    if (!std::isspace(static_cast<unsigned char>(line[0]))) {
      const std::string& head = toks[0];
      if (head == "NAME") {
        if (toks.size() > 1) m.name = toks[1];
        continue;
      }
      if (head == "ROWS") { section = Section::rows; continue; }
      if (head == "COLUMNS") { section = Section::columns; continue; }
      if (head == "RHS") { section = Section::rhs; continue; }
      if (head == "BOUNDS") { section = Section::bounds; continue; }
      if (head == "ENDATA") { section = Section::done; break; }
      if (head == "RANGES")
        throw ParseError("RANGES section not supported", lineno);
      throw ParseError("section '" + head + "' not supported", lineno);
    }

    switch (section) {
      case Section::rows: {
        if (toks.size() != 2)
          throw ParseError("ROWS line needs 'type name'", lineno);
        if (toks[0].size() != 1 ||
            std::string("NELG").find(toks[0][0]) == std::string::npos)
          throw ParseError("unknown row type '" + toks[0] + "'", lineno);
        if (!row_names.insert(toks[1]).second)
          throw ParseError("duplicate row '" + toks[1] + "'", lineno);
        if (toks[0][0] == 'N') ++objective_rows;
        m.rows.push_back({toks[0][0], toks[1]});
        break;
      }
      case Section::columns: {
        if (toks.size() >= 3 && toks[1] == "'MARKER'")
          throw ParseError("integrality markers not supported", lineno);
        if (toks.size() != 3 && toks.size() != 5)
          throw ParseError("COLUMNS line needs 'col row value [row value]'",
                           lineno);
        const std::string& col = toks[0];
        if (column_seen.insert(col).second) m.column_order.push_back(col);
        for (std::size_t i = 1; i + 1 < toks.size(); i += 2) {
          if (!row_names.count(toks[i]))
            throw ParseError("reference to undeclared row '" + toks[i] + "'",
                             lineno);
          if (!entry_seen.insert({col, toks[i]}).second)
            throw ParseError(
                "duplicate entry for column '" + col + "' row '" + toks[i] + "'",
                lineno);
          m.entries.push_back({col, toks[i], parse_num(toks[i + 1], lineno)});
        }
        break;
      }
      case Section::rhs: {
        if (toks.size() != 3 && toks.size() != 5)
          throw ParseError("RHS line needs 'set row value [row value]'", lineno);
        for (std::size_t i = 1; i + 1 < toks.size(); i += 2) {
          if (!row_names.count(toks[i]))
            throw ParseError("reference to undeclared row '" + toks[i] + "'",
                             lineno);
          if (!rhs_seen.insert(toks[i]).second)
            throw ParseError("duplicate rhs for row '" + toks[i] + "'", lineno);
          m.rhs.push_back({toks[i], parse_num(toks[i + 1], lineno)});
        }
        break;
      }
      case Section::bounds: {
        if (toks.size() < 3)
          throw ParseError("BOUNDS line needs 'type set column [value]'",
                           lineno);
        const std::string& type = toks[0];
        if (type == "LO" || type == "UP" || type == "FX") {
          if (toks.size() != 4)
            throw ParseError("bound type " + type + " needs a value", lineno);
        } else if (type == "FR") {
          if (toks.size() != 3)
            throw ParseError("bound type FR takes no value", lineno);
        } else {
          throw ParseError("bound type '" + type + "' not supported", lineno);
        }
        const std::string& col = toks[2];
        if (!column_seen.count(col))
          throw ParseError("bound on undeclared column '" + col + "'", lineno);
        if (!bound_seen.insert({type, col}).second)
          throw ParseError("duplicate " + type + " bound on '" + col + "'",
                           lineno);
        m.bounds.push_back(
            {type, col, type == "FR" ? 0.0 : parse_num(toks[3], lineno)});
        break;
      }
      case Section::none:
      case Section::done:
        throw ParseError("data outside any section", lineno);
    }
  }
  if (objective_rows != 1)
    throw ParseError("need exactly one objective (N) row, found " +
                         std::to_string(objective_rows),
                     lineno);
  return m;
}

// ---------------------------------------------------------------------------
// MPS model -> constrained polytope
// ---------------------------------------------------------------------------

// Conversion bookkeeping: new coordinate j holds original column
// original_column[j] (or -1 for a slack), with original value equal to
// coordinate + column_shift[j] (sign_flip applies first for negated columns).
struct MpsConversion {
  ConstrainedPolytope polytope;
  std::vector<std::string> column_names;
  std::vector<Index> original_column;
  Vector column_shift;
};

inline MpsConversion mps_to_constrained(const MpsModel& m) {
  const Index ncols = Index(m.column_order.size());
  std::map<std::string, Index> col_id;
  for (Index j = 0; j < ncols; ++j) col_id[m.column_order[j]] = j;

  // Bound summary per original column.
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> lo(ncols, 0.0), up(ncols, inf);
  std::vector<char> fixed(ncols, 0), freed(ncols, 0);
  std::vector<double> fix_value(ncols, 0.0);
  for (const MpsBound& b : m.bounds) {
    const Index j = col_id.at(b.column);
    if (b.type == "LO") lo[j] = b.value;
    else if (b.type == "UP") up[j] = b.value;
    else if (b.type == "FX") { fixed[j] = 1; fix_value[j] = b.value; }
    else { freed[j] = 1; }
  }

  // New coordinate order: free/fixed originals lead, bounded originals and
  // slacks trail.
  std::vector<Index> new_index(ncols, -1);
  std::vector<std::string> names;
  std::vector<Index> original;
  std::vector<double> shift;
  for (Index j = 0; j < ncols; ++j) {
    if (freed[j] || fixed[j]) {
      new_index[j] = Index(names.size());
      names.push_back(m.column_order[j]);
      original.push_back(j);
      shift.push_back(0.0);
    }
  }
  const Index lead = Index(names.size());
  for (Index j = 0; j < ncols; ++j) {
    if (!freed[j] && !fixed[j]) {
      new_index[j] = Index(names.size());
      names.push_back(m.column_order[j]);
      original.push_back(j);
      shift.push_back(lo[j]);
    }
  }

  // Constraint rows in declaration order, objective dropped.
  std::map<std::string, Index> row_id;
  std::vector<char> row_type;
  for (const MpsRow& r : m.rows) {
    if (r.type == 'N') continue;
    row_id[r.name] = Index(row_type.size());
    row_type.push_back(r.type);
  }
  const Index nrows = Index(row_type.size());

  std::vector<double> rhs(nrows, 0.0);
  for (const MpsRhsEntry& r : m.rhs) {
    const auto it = row_id.find(r.row);
    if (it == row_id.end()) continue;  // objective-row rhs is a constant shift
    rhs[it->second] = r.value;
  }

  std::vector<Triplet> triplets;
  triplets.reserve(m.entries.size() + 4 * static_cast<std::size_t>(ncols));
  for (const MpsEntry& e : m.entries) {
    const auto it = row_id.find(e.row);
    if (it == row_id.end()) continue;  // objective coefficients dropped
    const Index j = col_id.at(e.column);
    triplets.emplace_back(it->second, new_index[j], e.value);
    // Shifted variable: a*(x' + lo) moves a*lo to the right-hand side.
    if (shift[new_index[j]] != 0.0) rhs[it->second] -= e.value * shift[new_index[j]];
  }

  // Inequality rows take a trailing slack each: L rows +1, G rows -1.
  Index next = Index(names.size());
  for (Index i = 0; i < nrows; ++i) {
    if (row_type[i] == 'E') continue;
    triplets.emplace_back(i, next, row_type[i] == 'L' ? 1.0 : -1.0);
    names.push_back("_slack_row" + std::to_string(i));
    original.push_back(-1);
    shift.push_back(0.0);
    ++next;
  }

  // Finite upper bounds become extra equality rows x' + s = up - lo.
  std::vector<Triplet> extra_rows;
  std::vector<double> extra_rhs;
  for (Index j = 0; j < ncols; ++j) {
    if (fixed[j] || freed[j] || up[j] == inf) continue;
    const Index r = nrows + Index(extra_rhs.size());
    extra_rows.emplace_back(r, new_index[j], 1.0);
    extra_rows.emplace_back(r, next, 1.0);
    names.push_back("_slack_ub_" + m.column_order[j]);
    original.push_back(-1);
    shift.push_back(0.0);
    ++next;
    extra_rhs.push_back(up[j] - lo[j]);
  }
  // Fixed variables pin their (leading) coordinate with an equality row.
  for (Index j = 0; j < ncols; ++j) {
    if (!fixed[j]) continue;
    const Index r = nrows + Index(extra_rhs.size());
    extra_rows.emplace_back(r, new_index[j], 1.0);
    extra_rhs.push_back(fix_value[j]);
  }

  const Index d = next;
  const Index total_rows = nrows + Index(extra_rhs.size());
  for (const Triplet& t : extra_rows) triplets.push_back(t);

  MpsConversion out;
  out.polytope.A = from_triplets(total_rows, d, triplets);
  out.polytope.b = Vector(total_rows);
  for (Index i = 0; i < nrows; ++i) out.polytope.b[i] = rhs[i];
  for (std::size_t i = 0; i < extra_rhs.size(); ++i)
    out.polytope.b[nrows + Index(i)] = extra_rhs[i];
  out.polytope.k = d - lead;
  out.polytope.check();
  out.column_names = std::move(names);
  out.original_column = std::move(original);
  out.column_shift = Vector(d);
  for (Index j = 0; j < d; ++j) out.column_shift[j] = shift[static_cast<std::size_t>(j)];
  return out;
}

inline MpsModel load_mps(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_mps(buf.str());
}

// ---------------------------------------------------------------------------
// CSV samples and JSON report
// ---------------------------------------------------------------------------

inline void write_samples_csv(const DenseMatrix& samples, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  for (Index j = 0; j < samples.cols(); ++j)
    os << (j ? "," : "") << "x" << j;
  os << "\n";
  char buf[64];
  for (Index i = 0; i < samples.rows(); ++i) {
    for (Index j = 0; j < samples.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", samples(i, j));
      os << (j ? "," : "") << buf;
    }
    os << "\n";
  }
  if (!os.flush()) throw IoError("write failed for '" + path + "'");
}

inline DenseMatrix read_samples_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "'");
  std::string line;
  Index lineno = 0;
  if (!std::getline(is, line)) throw ParseError("empty CSV", 1);
  ++lineno;
  const auto count_fields = [](const std::string& s) {
    Index n = 1;
    for (char c : s)
      if (c == ',') ++n;
    return n;
  };
  const Index cols = count_fields(line);
  std::vector<double> values;
  Index rows = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    Index field = 0;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t comma = line.find(',', pos);
      if (comma == std::string::npos) comma = line.size();
      values.push_back(detail::parse_double(
          std::string_view(line).substr(pos, comma - pos), lineno));
      ++field;
      pos = comma + 1;
    }
    if (field != cols)
      throw ParseError("expected " + std::to_string(cols) + " fields", lineno);
    ++rows;
  }
  DenseMatrix out(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j)
      out(i, j) = values[static_cast<std::size_t>(i * cols + j)];
  return out;
}

inline nlohmann::json report_to_json(const DiagnosticsReport& rep) {
  nlohmann::json j;
  j["ess_min"] = rep.ess_min;
  j["ks_statistic"] = rep.ks_statistic;
  j["ks_pvalue"] = rep.ks_pvalue;
  j["acceptance_rate"] = rep.acceptance_rate;
  j["ess_per_coordinate"] = std::vector<double>(
      rep.ess_per_coordinate.data(),
      rep.ess_per_coordinate.data() + rep.ess_per_coordinate.size());
  return j;
}

inline void write_report_json(const DiagnosticsReport& rep, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << report_to_json(rep).dump(2) << "\n";
  if (!os.flush()) throw IoError("write failed for '" + path + "'");
}

}  // namespace polysamp
