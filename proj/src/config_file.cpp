#include "dispatchsim/config_file.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace dispatchsim {

namespace {

struct Token {
  std::string text;
  int line = 0;
};

// Whitespace-separated words; '{' '}' '=' ':' split off as their own tokens,
// '#' comments run to end of line, '\r' is whitespace.
std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> out;
  int line = 1;
  int word_line = 1;
  std::string word;
  const auto flush = [&]() {
    if (!word.empty()) {
      out.push_back({word, word_line});
      word.clear();
    }
  };
  for (size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '\n') {
      flush();
      ++line;
    } else if (c == '#') {
      flush();
      while (i + 1 < text.size() && text[i + 1] != '\n') ++i;
    } else if (c == ' ' || c == '\t' || c == '\r') {
      flush();
    } else if (c == '{' || c == '}' || c == '=' || c == ':') {
      flush();
      out.push_back({std::string(1, c), line});
    } else {
      if (word.empty()) word_line = line;
      word += c;
    }
  }
  flush();
  return out;
}

bool is_directive_word(const std::string& t) {
  return t == "edge" || t == "at" || t == "generator" || t == "load";
}

// Staged pieces; cross-references (bus counts, ranges) resolve after parsing.
struct RawEdge {
  long from = 0;
  long to = 0;
  bool both_ways = false;
  double weight = 0.0;
  int line = 0;
};

struct Staging {
  bool seen_horizon = false;
  long horizon = 0;

  bool seen_protocol = false;
  Protocol protocol = Protocol::GridConnected;
  std::vector<Token> eps_tokens;
  double mu = 0.0;
  std::vector<Token> sigma_tokens;

  bool seen_system = false;
  SystemParams system;

  bool seen_graph = false;
  std::vector<RawEdge> edges;
  std::vector<std::pair<long, int>> er_to;    // 1-based bus, line
  std::vector<std::pair<long, int>> er_from;

  std::vector<Event> events;

  std::vector<Token> init_lambda_tokens;
  int initial_mode = 1;
};

class Parser {
 public:
  Parser(const std::string& text, const std::string& source)
      : source_(source), tokens_(tokenize(text)) {}

  ScenarioConfig parse() {
    while (!at_end()) top_statement();
    return materialize();
  }

 private:
  const std::string source_;
  std::vector<Token> tokens_;
  size_t pos_ = 0;
  Staging st_;

  [[noreturn]] void fail(int line, const std::string& msg) const {
    throw ConfigError(source_ + ":" + std::to_string(line) + ": " + msg);
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(source_ + ": " + msg);
  }

  bool at_end() const { return pos_ >= tokens_.size(); }
  const Token& peek(size_t ahead = 0) const {
    static const Token kEof{"", 0};
    return pos_ + ahead < tokens_.size() ? tokens_[pos_ + ahead] : kEof;
  }
  Token take() {
    if (at_end()) fail("unexpected end of file");
    return tokens_[pos_++];
  }

  void expect(const std::string& text, const std::string& context) {
    if (at_end()) fail("expected '" + text + "' " + context + ", got end of file");
    const Token t = take();
    if (t.text != text)
      fail(t.line, "expected '" + text + "' " + context + ", got '" + t.text + "'");
  }

  Token take_value(const std::string& key) {
    if (at_end()) fail("missing value for '" + key + "'");
    const Token t = take();
    if (t.text == "{" || t.text == "}" || t.text == "=")
      fail(t.line, "missing value for '" + key + "'");
    return t;
  }

  double parse_double(const Token& t) const {
    double v = 0.0;
    const char* begin = t.text.data();
    const char* end = begin + t.text.size();
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc() || res.ptr != end)
      fail(t.line, "expected a number, got '" + t.text + "'");
    return v;
  }

  long parse_long(const Token& t) const {
    long v = 0;
    const char* begin = t.text.data();
    const char* end = begin + t.text.size();
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc() || res.ptr != end)
      fail(t.line, "expected an integer, got '" + t.text + "'");
    return v;
  }

  // Multi-value runs (eps, sigma, er lists, init lambda) end at a brace, a
  // directive keyword, or the key of the next assignment.
  std::vector<Token> take_value_run(const std::string& key) {
    std::vector<Token> run;
    while (!at_end()) {
      const std::string& t = peek().text;
      if (t == "{" || t == "}" || t == "=") break;
      if (is_directive_word(t)) break;
      if (peek(1).text == "=") break;
      run.push_back(take());
    }
    if (run.empty())
      fail(at_end() ? tokens_.back().line : peek().line,
           "missing value for '" + key + "'");
    return run;
  }

  void mark_seen(std::set<std::string>& seen, const Token& key) {
    if (!seen.insert(key.text).second)
      fail(key.line, "duplicate key '" + key.text + "'");
  }

  void top_statement() {
    const Token key = take();
    if (key.text == "}") fail(key.line, "unexpected '}' at top level");
    if (key.text == "horizon") {
      if (st_.seen_horizon) fail(key.line, "duplicate key 'horizon'");
      st_.seen_horizon = true;
      expect("=", "after 'horizon'");
      st_.horizon = parse_long(take_value("horizon"));
    } else if (key.text == "protocol") {
      if (st_.seen_protocol) fail(key.line, "duplicate section 'protocol'");
      st_.seen_protocol = true;
      expect("{", "after 'protocol'");
      protocol_block(key.line);
    } else if (key.text == "system") {
      if (st_.seen_system) fail(key.line, "duplicate section 'system'");
      st_.seen_system = true;
      expect("{", "after 'system'");
      system_block(key.line);
    } else if (key.text == "graph") {
      if (st_.seen_graph) fail(key.line, "duplicate section 'graph'");
      st_.seen_graph = true;
      expect("{", "after 'graph'");
      graph_block(key.line);
    } else if (key.text == "events") {
      expect("{", "after 'events'");
      events_block(key.line);
    } else if (key.text == "init") {
      expect("{", "after 'init'");
      init_block(key.line);
    } else {
      fail(key.line, "unknown key '" + key.text + "'");
    }
  }

  void protocol_block(int open_line) {
    std::set<std::string> seen;
    bool has_kind = false, has_eps = false, has_mu = false;
    while (true) {
      if (at_end()) fail(open_line, "unclosed section 'protocol'");
      const Token key = take();
      if (key.text == "}") break;
      mark_seen(seen, key);
      expect("=", "after '" + key.text + "'");
      if (key.text == "kind") {
        has_kind = true;
        const Token v = take_value("kind");
        if (v.text == "gc")
          st_.protocol = Protocol::GridConnected;
        else if (v.text == "int")
          st_.protocol = Protocol::Integrated;
        else
          fail(v.line, "unknown protocol kind '" + v.text + "' (expected gc or int)");
      } else if (key.text == "eps") {
        has_eps = true;
        st_.eps_tokens = take_value_run("eps");
      } else if (key.text == "mu") {
        has_mu = true;
        st_.mu = parse_double(take_value("mu"));
      } else if (key.text == "sigma") {
        st_.sigma_tokens = take_value_run("sigma");
      } else {
        fail(key.line, "unknown key '" + key.text + "' in protocol");
      }
    }
    if (!has_kind) fail(open_line, "protocol: missing required key 'kind'");
    if (!has_eps) fail(open_line, "protocol: missing required key 'eps'");
    if (!has_mu) fail(open_line, "protocol: missing required key 'mu'");
  }

  void system_block(int open_line) {
    bool has_lambda0 = false;
    std::set<std::string> names;
    while (true) {
      if (at_end()) fail(open_line, "unclosed section 'system'");
      const Token key = take();
      if (key.text == "}") break;
      if (key.text == "lambda0") {
        if (has_lambda0) fail(key.line, "duplicate key 'lambda0'");
        has_lambda0 = true;
        expect("=", "after 'lambda0'");
        st_.system.price_lambda0 = parse_double(take_value("lambda0"));
      } else if (key.text == "generator" || key.text == "load") {
        const Token name = take_value(key.text + " name");
        if (!names.insert(name.text).second)
          fail(name.line, "duplicate bus name '" + name.text + "'");
        expect("{", "after '" + name.text + "'");
        if (key.text == "generator")
          st_.system.generators.push_back(generator_block(name));
        else
          st_.system.generators.push_back(load_block(name));
      } else {
        fail(key.line, "unknown key '" + key.text + "' in system");
      }
    }
    if (!has_lambda0) fail(open_line, "system: missing required key 'lambda0'");
  }

  GeneratorParams generator_block(const Token& name) {
    static const char* kFields[] = {"alpha", "beta",   "gamma",  "p_min",
                                    "p_max", "loss_b", "demand"};
    std::map<std::string, double> vals;
    while (true) {
      if (at_end()) fail(name.line, "unclosed generator '" + name.text + "'");
      const Token key = take();
      if (key.text == "}") break;
      bool known = false;
      for (const char* f : kFields) known = known || key.text == f;
      if (!known)
        fail(key.line, "unknown key '" + key.text + "' in generator '" + name.text + "'");
      if (vals.count(key.text)) fail(key.line, "duplicate key '" + key.text + "'");
      expect("=", "after '" + key.text + "'");
      vals[key.text] = parse_double(take_value(key.text));
    }
    for (const char* f : kFields)
      if (!vals.count(f))
        fail(name.line,
             "generator '" + name.text + "': missing required key '" + f + "'");
    GeneratorParams gp;
    gp.alpha = vals["alpha"];
    gp.beta = vals["beta"];
    gp.gamma = vals["gamma"];
    gp.p_min = vals["p_min"];
    gp.p_max = vals["p_max"];
    gp.loss_factor = vals["loss_b"];
    gp.demand = vals["demand"];
    return gp;
  }

  GeneratorParams load_block(const Token& name) {
    bool has_demand = false;
    GeneratorParams gp;  // pure consumer: no capacity, unit curvature
    gp.alpha = 0.0;
    gp.beta = 1.0;
    gp.gamma = 0.0;
    gp.p_min = 0.0;
    gp.p_max = 0.0;
    gp.loss_factor = 0.0;
    while (true) {
      if (at_end()) fail(name.line, "unclosed load '" + name.text + "'");
      const Token key = take();
      if (key.text == "}") break;
      if (key.text != "demand")
        fail(key.line, "unknown key '" + key.text + "' in load '" + name.text + "'");
      if (has_demand) fail(key.line, "duplicate key 'demand'");
      has_demand = true;
      expect("=", "after 'demand'");
      gp.demand = parse_double(take_value("demand"));
    }
    if (!has_demand)
      fail(name.line, "load '" + name.text + "': missing required key 'demand'");
    return gp;
  }

  void graph_block(int open_line) {
    std::set<std::string> seen;
    while (true) {
      if (at_end()) fail(open_line, "unclosed section 'graph'");
      const Token key = take();
      if (key.text == "}") break;
      if (key.text == "edge") {
        RawEdge e;
        e.line = key.line;
        e.from = parse_long(take_value("edge"));
        const Token arrow = take_value("edge");
        if (arrow.text == "->")
          e.both_ways = false;
        else if (arrow.text == "<->")
          e.both_ways = true;
        else
          fail(arrow.line, "expected '->' or '<->', got '" + arrow.text + "'");
        e.to = parse_long(take_value("edge"));
        if (e.from == e.to)
          fail(e.line, "edge " + std::to_string(e.from) + " " + arrow.text + " " +
                           std::to_string(e.to) + " is a self-loop");
        expect(":", "before the edge weight");
        e.weight = parse_double(take_value("edge weight"));
        st_.edges.push_back(e);
      } else if (key.text == "er_to" || key.text == "er_from") {
        mark_seen(seen, key);
        expect("=", "after '" + key.text + "'");
        auto& list = key.text == "er_to" ? st_.er_to : st_.er_from;
        for (const Token& t : take_value_run(key.text))
          list.emplace_back(parse_long(t), t.line);
      } else {
        fail(key.line, "unknown key '" + key.text + "' in graph");
      }
    }
  }

  void events_block(int open_line) {
    while (true) {
      if (at_end()) fail(open_line, "unclosed section 'events'");
      const Token key = take();
      if (key.text == "}") break;
      if (key.text != "at")
        fail(key.line, "expected 'at ROUND KIND ...', got '" + key.text + "'");
      Event e;
      e.round = parse_long(take_value("at"));
      const Token kind = take_value("event kind");
      if (kind.text == "set_mode") {
        e.kind = EventKind::SetMode;
        e.value = parse_double(take_value("set_mode"));
      } else if (kind.text == "set_price") {
        e.kind = EventKind::SetPrice;
        e.value = parse_double(take_value("set_price"));
      } else if (kind.text == "set_demand") {
        e.kind = EventKind::SetDemand;
        e.bus = static_cast<int>(parse_long(take_value("set_demand"))) - 1;
        e.value = parse_double(take_value("set_demand"));
      } else if (kind.text == "outage_dg") {
        e.kind = EventKind::OutageDg;
        e.bus = static_cast<int>(parse_long(take_value("outage_dg"))) - 1;
      } else if (kind.text == "reconnect_dg") {
        e.kind = EventKind::ReconnectDg;
        e.bus = static_cast<int>(parse_long(take_value("reconnect_dg"))) - 1;
      } else {
        fail(kind.line, "unknown event kind '" + kind.text + "'");
      }
      st_.events.push_back(e);
    }
  }

  void init_block(int open_line) {
    std::set<std::string> seen;
    while (true) {
      if (at_end()) fail(open_line, "unclosed section 'init'");
      const Token key = take();
      if (key.text == "}") break;
      mark_seen(seen, key);
      expect("=", "after '" + key.text + "'");
      if (key.text == "lambda") {
        st_.init_lambda_tokens = take_value_run("lambda");
      } else if (key.text == "mode") {
        st_.initial_mode = static_cast<int>(parse_long(take_value("mode")));
      } else {
        fail(key.line, "unknown key '" + key.text + "' in init");
      }
    }
  }

  ScenarioConfig materialize() {
    if (!st_.seen_system) fail("missing required section 'system'");
    if (!st_.seen_graph) fail("missing required section 'graph'");
    if (!st_.seen_protocol) fail("missing required section 'protocol'");
    if (!st_.seen_horizon) fail("missing required key 'horizon'");

    ScenarioConfig cfg;
    cfg.horizon = st_.horizon;
    cfg.system = st_.system;
    cfg.protocol = st_.protocol;
    cfg.events = st_.events;
    cfg.initial_mode = st_.initial_mode;
    const int n = cfg.system.size();

    // graph: receiver-row adjacency, edges checked against the bus count
    cfg.graph.icu_adjacency = Eigen::MatrixXd::Zero(n, n);
    cfg.graph.er_to_icu = Eigen::VectorXd::Zero(n);
    cfg.graph.icu_to_er = Eigen::VectorXd::Zero(n);
    std::vector<uint8_t> assigned(static_cast<size_t>(n) * n, 0);
    const auto check_bus = [&](long bus, int line) {
      if (bus < 1 || bus > n)
        fail(line, "edge references bus " + std::to_string(bus) + ", but there are " +
                       std::to_string(n) + " buses");
    };
    for (const RawEdge& e : st_.edges) {
      check_bus(e.from, e.line);
      check_bus(e.to, e.line);
      const auto place = [&](long from, long to) {
        auto& slot = assigned[static_cast<size_t>(to - 1) * n + (from - 1)];
        if (slot)
          fail(e.line, "duplicate edge between bus " + std::to_string(from) +
                           " and bus " + std::to_string(to));
        slot = 1;
        cfg.graph.icu_adjacency(to - 1, from - 1) = e.weight;
      };
      place(e.from, e.to);
      if (e.both_ways) place(e.to, e.from);
    }
    const auto fill_er = [&](const std::vector<std::pair<long, int>>& list,
                             Eigen::VectorXd& vec, const char* what) {
      for (const auto& [bus, line] : list) {
        if (bus < 1 || bus > n)
          fail(line, std::string(what) + " references bus " + std::to_string(bus) +
                         ", but there are " + std::to_string(n) + " buses");
        vec[bus - 1] = 1.0;
      }
    };
    fill_er(st_.er_to, cfg.graph.er_to_icu, "er_to");
    fill_er(st_.er_from, cfg.graph.icu_to_er, "er_from");

    // protocol: a single eps broadcasts to every bus
    if (st_.eps_tokens.size() == 1 && n > 1) {
      cfg.protocol_cfg.eps =
          Eigen::VectorXd::Constant(n, parse_double(st_.eps_tokens[0]));
    } else {
      cfg.protocol_cfg.eps.resize(static_cast<Eigen::Index>(st_.eps_tokens.size()));
      for (size_t i = 0; i < st_.eps_tokens.size(); ++i)
        cfg.protocol_cfg.eps[static_cast<Eigen::Index>(i)] =
            parse_double(st_.eps_tokens[i]);
    }
    cfg.protocol_cfg.mu = st_.mu;
    if (!st_.sigma_tokens.empty()) {
      const Token& head = st_.sigma_tokens[0];
      if (head.text == "reciprocal" && st_.sigma_tokens.size() == 1) {
        cfg.protocol_cfg.sigma = SigmaSchedule{1.0, 1.0};
      } else if (head.text == "power_law" && st_.sigma_tokens.size() == 3) {
        cfg.protocol_cfg.sigma.scale = parse_double(st_.sigma_tokens[1]);
        cfg.protocol_cfg.sigma.exponent = parse_double(st_.sigma_tokens[2]);
      } else {
        fail(head.line, "unknown sigma form '" + head.text +
                            "' (expected 'reciprocal' or 'power_law SCALE EXPONENT')");
      }
    }

    // init: a single lambda broadcasts to every bus
    if (st_.init_lambda_tokens.size() == 1 && n > 1) {
      cfg.initial_lambda.assign(static_cast<size_t>(n),
                                parse_double(st_.init_lambda_tokens[0]));
    } else {
      for (const Token& t : st_.init_lambda_tokens)
        cfg.initial_lambda.push_back(parse_double(t));
    }
    return cfg;
  }
};

}  // namespace

ScenarioConfig parse_scenario_text(const std::string& text,
                                   const std::string& source_name) {
  return Parser(text, source_name).parse();
}

ScenarioConfig parse_scenario_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str(), path);
}

}  // namespace dispatchsim
