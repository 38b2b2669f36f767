#include "cpm/model_io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cpm {

namespace {

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

std::vector<Token> tokenize(std::string_view line) {
  if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i == line.size()) break;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    tokens.push_back({line.substr(start, i - start), start + 1});
  }
  return tokens;
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  const auto first = static_cast<unsigned char>(s.front());
  if (!std::isalpha(first) && first != '_') return false;
  for (char c : s) {
    const auto u = static_cast<unsigned char>(c);
    if (!std::isalnum(u) && c != '_' && c != '.' && c != '-') return false;
  }
  return true;
}

bool is_keyword(std::string_view s) { return s == "cpm" || s == "var" || s == "dist" || s == "end"; }

struct PendingDist {
  std::string name;
  std::vector<VarId> file_order;
  std::size_t line = 0;
  std::size_t column = 0;
  std::vector<double> values;
};

class Parser {
 public:
  Parser(std::string_view text, const ParseOptions& opts) : text_(text), opts_(opts) {}

  GeneratingSequence run() {
    std::size_t pos = 0;
    while (pos <= text_.size()) {
      const std::size_t nl = text_.find('\n', pos);
      std::string_view line = text_.substr(
          pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      ++line_no_;
      handle_line(tokenize(line));
      if (nl == std::string_view::npos) break;
      pos = nl + 1;
    }
    if (state_ != State::Done) {
      fail(ErrorKind::ParseError, line_no_, 1, "unexpected end of input; missing 'end'");
    }
    return std::move(seq_);
  }

 private:
  enum class State { Header, Vars, Dists, Done };

  [[noreturn]] void fail(ErrorKind kind, std::size_t line, std::size_t col,
                         const std::string& msg) const {
    throw ParseError(kind, line, col, msg);
  }

  void handle_line(const std::vector<Token>& toks) {
    if (toks.empty()) return;
    const Token& head = toks.front();

    if (state_ == State::Done) {
      fail(ErrorKind::ParseError, line_no_, head.column, "content after 'end'");
    }
    if (state_ == State::Header) {
      if (head.text != "cpm") {
        fail(ErrorKind::ParseError, line_no_, head.column, "expected header 'cpm 1'");
      }
      if (toks.size() != 2) {
        fail(ErrorKind::ParseError, line_no_, head.column, "header must be 'cpm <version>'");
      }
      if (toks[1].text != "1") {
        fail(ErrorKind::ParseError, line_no_, toks[1].column,
             "unsupported format version '" + std::string(toks[1].text) + "'");
      }
      state_ = State::Vars;
      return;
    }

    if (head.text == "var") return handle_var(toks);
    if (head.text == "dist") return handle_dist(toks);
    if (head.text == "end") {
      if (toks.size() != 1) {
        fail(ErrorKind::ParseError, line_no_, toks[1].column, "unexpected token after 'end'");
      }
      finish_dist();
      if (seq_.empty()) {
        fail(ErrorKind::ParseError, line_no_, head.column, "model declares no distributions");
      }
      state_ = State::Done;
      return;
    }
    if (head.text == "cpm") {
      fail(ErrorKind::ParseError, line_no_, head.column, "duplicate header");
    }
    handle_values(toks);
  }

  void handle_var(const std::vector<Token>& toks) {
    if (state_ != State::Vars) {
      fail(ErrorKind::ParseError, line_no_, toks[0].column,
           "variables must be declared before the first dist");
    }
    if (toks.size() != 3) {
      fail(ErrorKind::ParseError, line_no_, toks[0].column, "expected 'var <name> <cardinality>'");
    }
    const auto name = toks[1].text;
    if (!is_identifier(name) || is_keyword(name)) {
      fail(ErrorKind::ParseError, line_no_, toks[1].column,
           "invalid variable name '" + std::string(name) + "'");
    }
    if (registry_.find(name)) {
      fail(ErrorKind::ParseError, line_no_, toks[1].column,
           "variable '" + std::string(name) + "' declared twice");
    }
    std::size_t card = 0;
    const auto text = toks[2].text;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), card);
    if (ec != std::errc() || ptr != text.data() + text.size() || card < 1) {
      fail(ErrorKind::ParseError, line_no_, toks[2].column,
           "cardinality must be a positive integer, got '" + std::string(text) + "'");
    }
    registry_.add(std::string(name), card);
  }

  void handle_dist(const std::vector<Token>& toks) {
    if (state_ == State::Vars) {
      seq_ = GeneratingSequence(registry_);
      state_ = State::Dists;
    }
    finish_dist();
    if (toks.size() < 2 || !is_identifier(toks[1].text) || is_keyword(toks[1].text)) {
      fail(ErrorKind::ParseError, line_no_, toks[0].column, "expected 'dist <name> <var>...'");
    }
    PendingDist d;
    d.name = std::string(toks[1].text);
    d.line = line_no_;
    d.column = toks[0].column;
    for (std::size_t i = 2; i < toks.size(); ++i) {
      auto id = registry_.find(toks[i].text);
      if (!id) {
        fail(ErrorKind::UndeclaredVariable, line_no_, toks[i].column,
             "undeclared variable '" + std::string(toks[i].text) + "'");
      }
      for (VarId seen : d.file_order) {
        if (seen == *id) {
          fail(ErrorKind::ParseError, line_no_, toks[i].column,
               "variable '" + std::string(toks[i].text) + "' repeated in scope");
        }
      }
      d.file_order.push_back(*id);
    }
    pending_ = std::move(d);
  }

  void handle_values(const std::vector<Token>& toks) {
    if (!pending_) {
      fail(ErrorKind::ParseError, line_no_, toks[0].column,
           "unexpected '" + std::string(toks[0].text) + "'");
    }
    for (const auto& t : toks) {
      double v = 0.0;
      const char* first = t.text.data();
      const char* last = first + t.text.size();
      if (*first == '+') ++first;
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
        fail(ErrorKind::ParseError, line_no_, t.column,
             "invalid number '" + std::string(t.text) + "'");
      }
      if (v < 0.0) {
        fail(ErrorKind::NegativeEntry, line_no_, t.column,
             "negative probability '" + std::string(t.text) + "'");
      }
      pending_->values.push_back(v);
    }
  }

  void finish_dist() {
    if (!pending_) return;
    PendingDist d = std::move(*pending_);
    pending_.reset();

    std::vector<std::size_t> file_cards;
    for (VarId v : d.file_order) file_cards.push_back(registry_.cardinality(v));
    const std::size_t expected = checked_volume(file_cards);
    if (d.values.size() != expected) {
      fail(ErrorKind::ShapeMismatch, d.line, d.column,
           "dist '" + d.name + "' expects " + std::to_string(expected) + " values, got " +
               std::to_string(d.values.size()));
    }

    double sum = 0.0;
    for (double v : d.values) sum += v;
    if (opts_.renormalize) {
      if (!(sum > 0.0)) {
        fail(ErrorKind::NotNormalized, d.line, d.column,
             "dist '" + d.name + "' has zero total mass");
      }
      for (double& v : d.values) v /= sum;
    } else if (!(std::abs(sum - 1.0) <= opts_.norm_tol)) {
      std::ostringstream os;
      os.precision(17);
      os << "dist '" << d.name << "' sums to " << sum;
      fail(ErrorKind::NotNormalized, d.line, d.column, os.str());
    }

    // Permute from file order to canonical order.
    const Scope scope = Scope::from_unsorted(d.file_order);
    std::vector<std::size_t> cards = cards_of(scope, registry_);
    std::vector<std::size_t> file_stride(d.file_order.size());
    {
      std::size_t s = 1;
      for (std::size_t i = d.file_order.size(); i-- > 0;) {
        file_stride[i] = s;
        s *= file_cards[i];
      }
    }
    std::vector<std::size_t> stride_of_canonical(scope.size());
    for (std::size_t i = 0; i < d.file_order.size(); ++i) {
      stride_of_canonical[*scope.position(d.file_order[i])] = file_stride[i];
    }
    std::vector<double> values(expected);
    std::vector<std::size_t> cfg(scope.size(), 0);
    for (std::size_t i = 0; i < expected; ++i) {
      std::size_t src = 0;
      for (std::size_t k = 0; k < cfg.size(); ++k) src += cfg[k] * stride_of_canonical[k];
      values[i] = d.values[src];
      for (std::size_t k = cfg.size(); k-- > 0;) {
        if (++cfg[k] < cards[k]) break;
        cfg[k] = 0;
      }
    }

    Tolerance tol;
    tol.norm_tol = opts_.renormalize ? 1e-9 : opts_.norm_tol;
    seq_.add(Factor::from_table(Table(scope, std::move(cards), std::move(values)), tol), d.name);
  }

  std::string_view text_;
  ParseOptions opts_;
  std::size_t line_no_ = 0;
  State state_ = State::Header;
  VariableRegistry registry_;
  GeneratingSequence seq_;
  std::optional<PendingDist> pending_;
};

void append_number(std::string& out, double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  out.append(buf, static_cast<std::size_t>(n));
}

}  // namespace

GeneratingSequence parse_model(std::string_view text, const ParseOptions& opts) {
  if (!(opts.norm_tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "norm_tol must be positive");
  return Parser(text, opts).run();
}

std::string serialize_model(const GeneratingSequence& seq) {
  const auto& reg = seq.registry();
  std::string out = "cpm 1\n";
  for (VarId v = 0; v < reg.size(); ++v) {
    out += "var " + reg.name(v) + " " + std::to_string(reg.cardinality(v)) + "\n";
  }
  for (std::size_t k = 0; k < seq.size(); ++k) {
    const Factor& f = seq[k];
    out += "dist " + seq.names()[k];
    for (VarId v : f.scope()) out += " " + reg.name(v);
    out += "\n";
    const std::size_t row = f.cards().empty() ? 1 : f.cards().back();
    const auto values = f.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      append_number(out, values[i]);
      out += ((i + 1) % row == 0) ? '\n' : ' ';
    }
  }
  out += "end\n";
  return out;
}

GeneratingSequence read_model_file(const std::string& path, const ParseOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str(), opts);
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorKind::InvalidArgument, "failed writing '" + path + "'");
}

}  // namespace cpm
