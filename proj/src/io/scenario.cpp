#include "hthk/io/scenario.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hthk/error.hpp"

namespace hthk::io {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

class LineContext {
 public:
  LineContext(std::string_view source, std::size_t line, std::string_view key) : source_(source), line_(line), key_(key) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ValidationError(std::string(source_) + ":" + std::to_string(line_) + ": field '" + std::string(key_) + "': " + what);
  }

  double number(std::string_view tok) const {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) fail("'" + std::string(tok) + "' is not a number");
    if (!std::isfinite(v)) fail("'" + std::string(tok) + "' is not finite");
    return v;
  }

  std::size_t count(std::string_view tok) const {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) fail("'" + std::string(tok) + "' is not a non-negative integer");
    return v;
  }

  std::vector<double> vector(std::string_view value) const {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos < value.size()) {
      const auto start = value.find_first_not_of(" \t,", pos);
      if (start == std::string_view::npos) break;
      auto end = value.find_first_of(" \t,", start);
      if (end == std::string_view::npos) end = value.size();
      const auto tok = value.substr(start, end - start);
      if (const auto star = tok.find('*'); star != std::string_view::npos) {
        const std::size_t reps = count(tok.substr(0, star));
        if (reps == 0) fail("repeat count must be positive");
        out.insert(out.end(), reps, number(tok.substr(star + 1)));
      } else {
        out.push_back(number(tok));
      }
      pos = end;
    }
    if (out.empty()) fail("no values given");
    return out;
  }

 private:
  std::string_view source_;
  std::size_t line_;
  std::string_view key_;
};

std::string format_number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_vector(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i;
    while (j < v.size() && v[j] == v[i] && std::signbit(v[j]) == std::signbit(v[i])) ++j;
    const std::size_t run = j - i;
    if (!out.empty()) out += ' ';
    if (run >= 4) {
      out += std::to_string(run) + "*" + format_number(v[i]);
      i = j;
    } else {
      out += format_number(v[i]);
      ++i;
    }
  }
  return out;
}

}  // namespace

std::optional<OpinionState> Scenario::center_state() const {
  if (!center) return std::nullopt;
  return OpinionState(*center, r);
}

SimulationOptions Scenario::options() const {
  SimulationOptions o;
  o.max_steps = max_steps;
  o.convergence_tol = convergence_tol;
  o.tie_tol = tie_tol;
  o.mode = mode;
  return o;
}

Scenario parse_scenario(std::string_view text, std::string_view source) {
  Scenario sc;
  std::optional<std::size_t> declared_n;
  std::optional<std::size_t> x0_line, r_line, center_line;
  std::vector<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError(std::string(source) + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    const auto value = trim(line.substr(eq + 1));
    const LineContext ctx(source, line_no, key);
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) ctx.fail("given more than once");
    seen.push_back(key);
    if (value.empty()) ctx.fail("missing value");

    if (key == "n") {
      declared_n = ctx.count(value);
    } else if (key == "x0") {
      sc.x0 = ctx.vector(value);
      x0_line = line_no;
    } else if (key == "r") {
      sc.r = ctx.vector(value);
      r_line = line_no;
    } else if (key == "center") {
      sc.center = ctx.vector(value);
      center_line = line_no;
    } else if (key == "tie_tol") {
      sc.tie_tol = ctx.number(value);
    } else if (key == "convergence_tol") {
      sc.convergence_tol = ctx.number(value);
      if (!(sc.convergence_tol > 0.0)) ctx.fail("must be positive");
    } else if (key == "max_steps") {
      sc.max_steps = ctx.count(value);
    } else if (key == "stability_window") {
      sc.stability_window = ctx.count(value);
      if (sc.stability_window == 0) ctx.fail("must be positive");
    } else if (key == "mode") {
      if (value == "free") {
        sc.mode = Mode::Free;
      } else if (value == "frozen") {
        sc.mode = Mode::Frozen;
      } else {
        ctx.fail("expected 'free' or 'frozen'");
      }
    } else {
      ctx.fail("unknown key");
    }
  }

  const auto where = [&](std::optional<std::size_t> line, const char* key) {
    return std::string(source) + (line ? ":" + std::to_string(*line) : std::string()) + ": field '" + key + "': ";
  };
  if (sc.x0.empty()) throw ValidationError(where(std::nullopt, "x0") + "missing");
  if (sc.r.empty()) throw ValidationError(where(std::nullopt, "r") + "missing");
  if (declared_n && *declared_n != sc.x0.size()) {
    throw ValidationError(where(x0_line, "x0") + "has " + std::to_string(sc.x0.size()) + " values but n = " + std::to_string(*declared_n));
  }
  if (sc.r.size() == 1) sc.r.assign(sc.x0.size(), sc.r.front());
  if (sc.r.size() != sc.x0.size()) {
    throw ValidationError(where(r_line, "r") + "has " + std::to_string(sc.r.size()) + " values, expected " + std::to_string(sc.x0.size()));
  }
  for (double b : sc.r) {
    if (!(b > 0.0)) throw ValidationError(where(r_line, "r") + "bounds must be strictly positive");
    if (!(b + sc.tie_tol >= 0.0)) throw ValidationError(where(r_line, "r") + "r + tie_tol must be non-negative");
  }
  if (sc.center && sc.center->size() != sc.x0.size()) {
    throw ValidationError(where(center_line, "center") + "length differs from x0");
  }
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.string());
}

std::string serialize_scenario(const Scenario& sc) {
  std::string out;
  out += "n = " + std::to_string(sc.n()) + "\n";
  out += "x0 = " + format_vector(sc.x0) + "\n";
  out += "r = " + format_vector(sc.r) + "\n";
  if (sc.center) out += "center = " + format_vector(*sc.center) + "\n";
  out += "tie_tol = " + format_number(sc.tie_tol) + "\n";
  out += "convergence_tol = " + format_number(sc.convergence_tol) + "\n";
  out += "max_steps = " + std::to_string(sc.max_steps) + "\n";
  out += "stability_window = " + std::to_string(sc.stability_window) + "\n";
  out += "mode = " + std::string(to_string(sc.mode)) + "\n";
  return out;
}

}  // namespace hthk::io
