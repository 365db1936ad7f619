#include "starshape/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace starshape {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

struct Entry {
  std::string value;
  int line;
  bool used = false;
};

using Table = std::map<std::string, Entry>;  // "section.key" -> entry

Table tokenize(std::string_view text) {
  Table table;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    const std::string where = "line " + std::to_string(line_no) + ": ";

    line = trim(line);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw InputError(where + "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section != "problem" && section != "grid" && section != "solver" && section != "output")
        throw InputError(where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw InputError(where + "expected key = value");
    if (section.empty()) throw InputError(where + "key outside of a section");
    const std::string key(trim(line.substr(0, eq)));
    std::string_view raw = trim(line.substr(eq + 1));
    std::string value;
    if (!raw.empty() && raw.front() == '"') {
      const auto close = raw.find('"', 1);
      if (close == std::string_view::npos) throw InputError(where + "unterminated string");
      const auto rest = trim(raw.substr(close + 1));
      if (!rest.empty() && rest.front() != '#') throw InputError(where + "text after string value");
      value = std::string(raw.substr(1, close - 1));
    } else {
      const auto hash = raw.find('#');
      value = std::string(trim(raw.substr(0, hash)));
    }
    const std::string full = section + "." + key;
    if (table.count(full)) throw InputError(where + "duplicate key " + full);
    table.emplace(full, Entry{value, line_no});
  }
  return table;
}

class Reader {
 public:
  explicit Reader(Table table) : table_(std::move(table)) {}

  const Entry* find(const std::string& key) {
    auto it = table_.find(key);
    if (it == table_.end()) return nullptr;
    it->second.used = true;
    return &it->second;
  }

  template <typename T>
  void number(const std::string& key, T& out) {
    const Entry* e = find(key);
    if (!e) return;
    const char* first = e->value.data();
    const char* last = first + e->value.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || ptr != last)
      throw InputError("line " + std::to_string(e->line) + ": " + key + " is not a valid number");
  }

  void boolean(const std::string& key, bool& out) {
    const Entry* e = find(key);
    if (!e) return;
    if (e->value == "true" || e->value == "1" || e->value == "yes") {
      out = true;
    } else if (e->value == "false" || e->value == "0" || e->value == "no") {
      out = false;
    } else {
      throw InputError("line " + std::to_string(e->line) + ": " + key + " must be true or false");
    }
  }

  Expr expression(const std::string& key, bool required) {
    const Entry* e = find(key);
    if (!e) {
      if (required) throw InputError("missing required key " + key);
      return Expr::constant(1.0);
    }
    try {
      return Expr::parse(e->value);
    } catch (const ParseError& err) {
      throw InputError("line " + std::to_string(e->line) + ": " + key + ": " + err.what());
    }
  }

  void reject_unused() const {
    for (const auto& [key, entry] : table_)
      if (!entry.used)
        throw InputError("line " + std::to_string(entry.line) + ": unknown key " + key);
  }

 private:
  Table table_;
};

}  // namespace

RunConfig parse_config(std::string_view text) {
  Reader in(tokenize(text));
  RunConfig cfg;
  ProblemSpec& p = cfg.problem;

  in.number("problem.k", p.k);
  in.number("problem.n", p.n);
  if (p.n != 2) throw InputError("problem.n must be 2: the solver works on surfaces in R^3");
  if (p.k < 2 || p.k > p.n) throw InputError("problem.k must satisfy 2 <= k <= n");
  if (!in.find("problem.r1") || !in.find("problem.r2"))
    throw InputError("problem.r1 and problem.r2 are required");
  in.number("problem.r1", p.r1);
  in.number("problem.r2", p.r2);
  p.alpha.clear();
  for (int l = 0; l < p.k; ++l) p.alpha.push_back(in.expression("problem.alpha" + std::to_string(l), true));
  p.phi = in.expression("problem.phi", true);

  in.number("grid.n_theta", p.grid.n_theta);
  in.number("grid.n_phi", p.grid.n_phi);

  in.number("solver.tol", p.solver.tol);
  in.number("solver.max_iter", p.solver.max_iter);
  in.number("solver.max_halvings", p.solver.max_halvings);
  in.number("solver.dt_initial", p.solver.dt_initial);
  in.number("solver.dt_max", p.solver.dt_max);
  in.number("solver.dt_min", p.solver.dt_min);
  in.number("solver.hypothesis_samples", p.solver.hypothesis_samples);

  if (const Entry* e = in.find("output.dir")) cfg.output_dir = e->value;
  in.boolean("output.mesh", cfg.write_mesh);
  in.boolean("output.csv", cfg.write_csv);
  in.boolean("output.report", cfg.write_report);
  in.number("output.seed", cfg.seed);
  in.number("output.verbosity", cfg.verbosity);

  in.reject_unused();
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) throw InputError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << file.rdbuf();
  return parse_config(buffer.str());
}

}  // namespace starshape
