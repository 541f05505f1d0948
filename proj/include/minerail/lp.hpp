#pragma once

#include <cstdio>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "minerail/solver.hpp"

namespace minerail {

namespace lp {

/// Encode an arbitrary node label into LP-safe characters. Everything
/// outside [A-Za-z0-9] (including 'x' itself) becomes xHH, so decoding is
/// unambiguous and '_' stays free as a field separator.
inline std::string encode_label(const std::string& s) {
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if ((std::isalnum(c) && c != 'x')) {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('x');
      out.push_back(hex[c >> 4]);
      out.push_back(hex[c & 15]);
    }
  }
  return out;
}

inline std::string decode_label(const std::string& s) {
  std::string out;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == 'x') {
      if (i + 2 >= s.size()) throw ValidationError("bad label encoding '" + s + "'");
      out.push_back(static_cast<char>(std::stoi(s.substr(i + 1, 2), nullptr, 16)));
      i += 2;
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

struct VarName {
  int train = -1;
  std::string from_label, to_label;
  int from_time = -1;  // -1 encodes "n" (untimed: source/sink side)
  int to_time = -1;
};

inline std::string var_name(const MipModel& m, int vi) {
  const TimeSpaceNetwork& ts = *m.tsn;
  const MipVar& v = m.vars[vi];
  const TsArc& a = ts.arcs[v.key.arc];
  auto side = [&](int node) -> std::pair<std::string, int> {
    const TsNode& n = ts.nodes[node];
    if (n.kind == TsNode::Source) return {"SRC", -1};
    if (n.kind == TsNode::Sink) return {"SNK", -1};
    return {ts.net.nodes[n.phys].id, n.time};
  };
  auto [fl, ftv] = side(a.from);
  auto [tl, ttv] = side(a.to);
  auto tstr = [](int t) { return t < 0 ? std::string("n") : std::to_string(t); };
  return "t" + std::to_string(v.key.train) + "_" + encode_label(fl) + "_" + tstr(ftv) + "_" +
         encode_label(tl) + "_" + tstr(ttv);
}

inline VarName decode_var_name(const std::string& name) {
  if (name.empty() || name[0] != 't') throw ValidationError("variable name must start with t");
  std::vector<std::string> parts;
  std::string cur;
  for (size_t i = 1; i < name.size(); ++i) {
    if (name[i] == '_') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(name[i]);
    }
  }
  parts.push_back(cur);
  if (parts.size() != 5) throw ValidationError("variable name '" + name + "' is not 5 fields");
  VarName v;
  v.train = std::stoi(parts[0]);
  v.from_label = decode_label(parts[1]);
  v.from_time = parts[2] == "n" ? -1 : std::stoi(parts[2]);
  v.to_label = decode_label(parts[3]);
  v.to_time = parts[4] == "n" ? -1 : std::stoi(parts[4]);
  return v;
}

inline std::string fmt_num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

}  // namespace lp

/// Emit the model in LP text format (Minimize / Subject To / Bounds /
/// Binaries / End). Only live variables appear. When warm hints are given,
/// `warm_out` receives one "name value" pair per line.
inline std::string export_lp(const MipModel& m, const std::optional<WarmStart>& warm = std::nullopt,
                             std::string* warm_out = nullptr) {
  std::ostringstream os;
  os << "\\ binary train-routing program over a time-space network\n";
  os << "Minimize\n obj:";
  int col = 5;
  auto emit_term = [&](double coef, const std::string& name, bool first) {
    std::string term;
    if (coef >= 0)
      term = (first ? " " : " + ") + (coef == 1 ? name : lp::fmt_num(coef) + " " + name);
    else
      term = " - " + (coef == -1 ? name : lp::fmt_num(-coef) + " " + name);
    if (col + static_cast<int>(term.size()) > 200) {
      os << "\n  ";
      col = 2;
    }
    os << term;
    col += static_cast<int>(term.size());
  };
  bool first = true;
  for (int vi = 0; vi < static_cast<int>(m.vars.size()); ++vi) {
    if (m.vars[vi].fixed0 || m.vars[vi].cost == 0) continue;
    emit_term(m.vars[vi].cost, lp::var_name(m, vi), first);
    first = false;
  }
  os << "\nSubject To\n";
  for (int ri = 0; ri < static_cast<int>(m.rows.size()); ++ri) {
    const auto& row = m.rows[ri];
    os << " c" << ri + 1 << ":";
    col = 8;
    first = true;
    for (auto [vi, c] : row.coefs) {
      emit_term(c, lp::var_name(m, vi), first);
      first = false;
    }
    os << (row.sense == '<' ? " <= " : " = ") << lp::fmt_num(row.rhs) << "\n";
    col = 0;
  }
  os << "Bounds\nBinaries\n";
  col = 0;
  for (int vi = 0; vi < static_cast<int>(m.vars.size()); ++vi) {
    if (m.vars[vi].fixed0) continue;
    std::string name = lp::var_name(m, vi);
    if (col + static_cast<int>(name.size()) + 1 > 200) {
      os << "\n";
      col = 0;
    }
    os << " " << name;
    col += static_cast<int>(name.size()) + 1;
  }
  os << "\nEnd\n";
  if (warm && warm_out) {
    std::ostringstream ws;
    for (const auto& [key, val] : warm->hints) {
      int vi = m.find_var(key.train, key.arc);
      if (vi >= 0 && !m.vars[vi].fixed0) ws << lp::var_name(m, vi) << " " << val << "\n";
    }
    *warm_out = ws.str();
  }
  return os.str();
}

namespace lp {

struct LpSummary {
  int variables = 0;   // distinct names in Binaries
  int rows = 0;        // constraints in Subject To
  int objective_terms = 0;
};

/// Grammar checker for the emitted LP dialect. Throws ValidationError on any
/// structural problem; returns variable/row counts for cross-checks.
inline LpSummary check_lp_document(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(is, line)) lines.push_back(line);
  size_t i = 0;
  auto skip_comments = [&] {
    while (i < lines.size() && (lines[i].empty() || lines[i][0] == '\\')) ++i;
  };
  auto expect_section = [&](const std::string& name) {
    skip_comments();
    if (i >= lines.size() || lines[i] != name)
      throw ValidationError("LP: expected section '" + name + "' at line " + std::to_string(i + 1));
    ++i;
  };
  auto gather = [&](auto stop) {
    std::string body;
    while (i < lines.size() && !stop(lines[i])) {
      body += " " + lines[i];
      ++i;
    }
    return body;
  };
  auto is_section = [](const std::string& l) {
    return l == "Minimize" || l == "Subject To" || l == "Bounds" || l == "Binaries" || l == "End";
  };

  LpSummary sum;
  std::set<std::string> declared;
  std::vector<std::string> row_vars;

  expect_section("Minimize");
  std::string obj = gather(is_section);
  // tokenize: "obj:" then terms
  std::istringstream ts(obj);
  std::string tok;
  if (!(ts >> tok) || tok != "obj:") throw ValidationError("LP: objective must be named 'obj:'");
  std::vector<std::string> obj_vars;
  auto parse_terms = [&](std::istringstream& s, std::vector<std::string>& vars,
                         std::string* sense_out, double* rhs_out) {
    bool have_coef = false;
    std::string t;
    while (s >> t) {
      if (t == "+" || t == "-") continue;
      if (t == "<=" || t == "=") {
        if (!sense_out) throw ValidationError("LP: unexpected sense in objective");
        *sense_out = t;
        if (!(s >> *rhs_out)) throw ValidationError("LP: missing right-hand side");
        if (s >> t) throw ValidationError("LP: trailing tokens after right-hand side");
        return;
      }
      char* end = nullptr;
      double v = std::strtod(t.c_str(), &end);
      (void)v;
      if (end && *end == '\0') {
        if (have_coef) throw ValidationError("LP: two consecutive numbers in expression");
        have_coef = true;
        continue;
      }
      decode_var_name(t);  // validates name shape
      vars.push_back(t);
      have_coef = false;
    }
    if (sense_out) throw ValidationError("LP: constraint missing sense");
  };
  parse_terms(ts, obj_vars, nullptr, nullptr);
  sum.objective_terms = static_cast<int>(obj_vars.size());

  expect_section("Subject To");
  while (i < lines.size() && !is_section(lines[i])) {
    std::string row = lines[i];
    ++i;
    while (i < lines.size() && !is_section(lines[i]) && lines[i].rfind("  ", 0) == 0) {
      row += lines[i];
      ++i;
    }
    std::istringstream rs(row);
    std::string name;
    rs >> name;
    if (name.empty() || name.back() != ':')
      throw ValidationError("LP: constraint must start with 'name:'");
    std::vector<std::string> vars;
    std::string sense;
    double rhs = 0;
    parse_terms(rs, vars, &sense, &rhs);
    if (vars.empty()) throw ValidationError("LP: empty constraint " + name);
    row_vars.insert(row_vars.end(), vars.begin(), vars.end());
    ++sum.rows;
  }
  expect_section("Bounds");
  gather(is_section);
  expect_section("Binaries");
  std::string bins = gather(is_section);
  std::istringstream bs(bins);
  while (bs >> tok) {
    decode_var_name(tok);
    if (!declared.insert(tok).second) throw ValidationError("LP: duplicate binary " + tok);
  }
  sum.variables = static_cast<int>(declared.size());
  expect_section("End");
  for (const auto& v : obj_vars)
    if (!declared.count(v)) throw ValidationError("LP: objective references undeclared " + v);
  for (const auto& v : row_vars)
    if (!declared.count(v)) throw ValidationError("LP: constraint references undeclared " + v);
  return sum;
}

}  // namespace lp
}  // namespace minerail
