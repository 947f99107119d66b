#include "rbl/cli/scenario_file.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace rbl::cli {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ScenarioParseError(path + ": " + msg);
}

// Object view that remembers which keys were read so leftovers can be rejected.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  const json& need(const std::string& key) {
    const json* v = find(key);
    if (!v) fail(at(key), "missing required field");
    return *v;
  }

  void reject_unknown() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail(at(it.key()), "unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

std::int64_t as_integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<std::int64_t>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

Point2 as_point(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2) fail(path, "expected [x, y]");
  return {as_number(v[0], path + "[0]"), as_number(v[1], path + "[1]")};
}

void read_number(Fields& f, const std::string& key, double& out) {
  if (const json* v = f.find(key)) out = as_number(*v, f.at(key));
}

void read_agent_keys(Fields& f, AgentConfig& cfg) {
  read_number(f, "delta", cfg.delta);
  if (const json* v = f.find("goal")) cfg.goal = as_point(*v, f.at("goal"));
  read_number(f, "k_p", cfg.k_p);
  read_number(f, "v_max", cfg.v_max);
  read_number(f, "a_max", cfg.a_max);
  read_number(f, "control_period", cfg.control_period);
  read_number(f, "d_u_track", cfg.d_u_track);
  read_number(f, "k_sigma", cfg.k_sigma);
  read_number(f, "lambda_gate", cfg.lambda_gate);
  if (const json* v = f.find("d_u_measurement")) {
    if (v->is_null()) {
      cfg.d_u_measurement.reset();
    } else {
      cfg.d_u_measurement = as_number(*v, f.at("d_u_measurement"));
    }
  }
  read_number(f, "epsilon_p", cfg.cell_params.epsilon_p);
  read_number(f, "epsilon_o", cfg.cell_params.epsilon_o);
  read_number(f, "sensing_radius_rs", cfg.cell_params.sensing_radius_rs);
  if (const json* v = f.find("disc_sides")) {
    cfg.cell_params.disc_sides = static_cast<int>(as_integer(*v, f.at("disc_sides")));
  }
  auto& ap = cfg.adapt_params;
  read_number(f, "beta_D", ap.beta_D);
  read_number(f, "k_beta", ap.k_beta);
  read_number(f, "k_e", ap.k_e);
  read_number(f, "d1", ap.d1);
  read_number(f, "d2", ap.d2);
  read_number(f, "d3", ap.d3);
  read_number(f, "d4", ap.d4);
  read_number(f, "eps_rot", ap.eps_rot);
  if (const json* v = f.find("turn_sign")) {
    const std::string s = as_string(*v, f.at("turn_sign"));
    if (s == "left") {
      ap.turn_sign = TurnSign::left;
    } else if (s == "right") {
      ap.turn_sign = TurnSign::right;
    } else {
      fail(f.at("turn_sign"), "expected \"left\" or \"right\"");
    }
  }
  if (const json* v = f.find("beta_range")) {
    const Point2 r = as_point(*v, f.at("beta_range"));
    cfg.beta_range = {r.x, r.y};
  }
}

template <class T, class Conv>
std::vector<std::vector<T>> read_matrix(const json& v, const std::string& path, Conv conv) {
  if (!v.is_array()) fail(path, "expected an array of rows");
  std::vector<std::vector<T>> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string row_path = path + "[" + std::to_string(i) + "]";
    if (!v[i].is_array()) fail(row_path, "expected an array");
    std::vector<T> row;
    for (std::size_t j = 0; j < v[i].size(); ++j) {
      row.push_back(conv(v[i][j], row_path + "[" + std::to_string(j) + "]"));
    }
    out.push_back(std::move(row));
  }
  return out;
}

bool as_flag(const json& v, const std::string& path) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_number_integer() && (v.get<int>() == 0 || v.get<int>() == 1)) return v.get<int>() == 1;
  fail(path, "expected 0, 1, true or false");
}

std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

Scenario from_json(const json& doc) {
  Fields top(doc, "");
  const json& version = top.need("format_version");
  if (as_integer(version, "format_version") != kScenarioFormatVersion) {
    fail("format_version", "unsupported version (expected 1)");
  }

  Scenario s;
  if (const json* v = top.find("name")) s.name = as_string(*v, "name");
  if (const json* v = top.find("seed")) {
    const auto seed = as_integer(*v, "seed");
    if (seed < 0) fail("seed", "must be non-negative");
    s.seed = static_cast<std::uint64_t>(seed);
  }
  read_number(top, "tick", s.tick);
  read_number(top, "duration_max", s.duration_max);
  read_number(top, "goal_tolerance", s.goal_tolerance);
  read_number(top, "disturbance_bound", s.disturbance_bound);

  if (const json* v = top.find("noise")) {
    Fields f(*v, "noise");
    if (const json* m = f.find("model")) {
      const std::string model = as_string(*m, "noise.model");
      if (model != "bounded_radial" && model != "none") {
        fail("noise.model", "expected \"bounded_radial\" or \"none\"");
      }
    }
    read_number(f, "bound", s.noise.bound);
    if (const json* m = f.find("lambda_mode")) {
      const std::string mode = as_string(*m, "noise.lambda_mode");
      if (mode == "saturate") {
        s.noise.lambda_mode = LambdaMode::saturate;
      } else if (mode == "random") {
        s.noise.lambda_mode = LambdaMode::random;
      } else {
        fail("noise.lambda_mode", "expected \"saturate\" or \"random\"");
      }
    }
    read_number(f, "lambda_random_max", s.noise.lambda_random_max);
    f.reject_unknown();
  }

  if (const json* v = top.find("obstacle_sensing")) {
    Fields f(*v, "obstacle_sensing");
    if (const json* m = f.find("mode")) {
      const std::string mode = as_string(*m, "obstacle_sensing.mode");
      if (mode == "circle") {
        s.obstacle_sensing = ObstacleSensing::circle;
      } else if (mode == "closest_point") {
        s.obstacle_sensing = ObstacleSensing::closest_point;
      } else {
        fail("obstacle_sensing.mode", "expected \"circle\" or \"closest_point\"");
      }
    }
    read_number(f, "closest_point_radius", s.closest_point_radius);
    f.reject_unknown();
  }

  AgentConfig defaults;
  if (const json* v = top.find("defaults")) {
    Fields f(*v, "defaults");
    read_agent_keys(f, defaults);
    f.reject_unknown();
  }

  const json& agents = top.need("agents");
  if (!agents.is_array() || agents.empty()) fail("agents", "expected a non-empty array");
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const std::string path = "agents[" + std::to_string(i) + "]";
    Fields f(agents[i], path);
    AgentSpec spec;
    spec.config = defaults;
    spec.start = as_point(f.need("start"), f.at("start"));
    f.need("goal");
    read_agent_keys(f, spec.config);
    f.reject_unknown();
    s.agents.push_back(spec);
  }

  if (const json* v = top.find("obstacles")) {
    if (!v->is_array()) fail("obstacles", "expected an array");
    for (std::size_t k = 0; k < v->size(); ++k) {
      const std::string path = "obstacles[" + std::to_string(k) + "]";
      Fields f((*v)[k], path);
      Obstacle o;
      o.center = as_point(f.need("center"), f.at("center"));
      o.radius = as_number(f.need("radius"), f.at("radius"));
      f.reject_unknown();
      s.obstacles.push_back(o);
    }
  }

  if (const json* v = top.find("forest")) {
    Fields f(*v, "forest");
    ForestSpec fs;
    if (const json* sd = f.find("seed")) {
      const auto seed = as_integer(*sd, "forest.seed");
      if (seed < 0) fail("forest.seed", "must be non-negative");
      fs.seed = static_cast<std::uint64_t>(seed);
    }
    Fields region(f.need("region"), "forest.region");
    fs.region.min = as_point(region.need("min"), "forest.region.min");
    fs.region.max = as_point(region.need("max"), "forest.region.max");
    region.reject_unknown();
    fs.count = static_cast<int>(as_integer(f.need("count"), "forest.count"));
    fs.radius = as_number(f.need("radius"), "forest.radius");
    fs.min_clearance = as_number(f.need("min_clearance"), "forest.min_clearance");
    f.reject_unknown();
    s.forest = fs;
  }

  s.adjacency = read_matrix<bool>(top.need("adjacency"), "adjacency", as_flag);
  s.gamma = read_matrix<double>(top.need("gamma_matrix"), "gamma_matrix", as_number);
  top.reject_unknown();

  const std::size_t n = s.agents.size();
  if (s.adjacency.size() != n) fail("adjacency", "expected " + std::to_string(n) + " rows");
  if (s.gamma.size() != n) fail("gamma_matrix", "expected " + std::to_string(n) + " rows");
  for (std::size_t i = 0; i < n; ++i) {
    if (s.adjacency[i].size() != n) {
      fail("adjacency[" + std::to_string(i) + "]", "expected " + std::to_string(n) + " entries");
    }
    if (s.gamma[i].size() != n) {
      fail("gamma_matrix[" + std::to_string(i) + "]", "expected " + std::to_string(n) + " entries");
    }
  }
  return s;
}

json point_json(Point2 p) { return json::array({p.x, p.y}); }

}  // namespace

Scenario parse_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioParseError("syntax error at " + line_col(text, e.byte) + ": " + e.what());
  }
  Scenario s = from_json(doc);
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ScenarioParseError(e.what());
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioParseError(path.string() + ": cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_scenario(buf.str());
  } catch (const ScenarioParseError& e) {
    throw ScenarioParseError(path.string() + ": " + e.what());
  }
}

std::string dump_scenario(const Scenario& s) {
  json doc;
  doc["format_version"] = kScenarioFormatVersion;
  doc["name"] = s.name;
  doc["seed"] = s.seed;
  doc["tick"] = s.tick;
  doc["duration_max"] = s.duration_max;
  doc["goal_tolerance"] = s.goal_tolerance;
  doc["disturbance_bound"] = s.disturbance_bound;
  doc["noise"] = {
      {"model", s.noise.bound > 0.0 ? "bounded_radial" : "none"},
      {"bound", s.noise.bound},
      {"lambda_mode", s.noise.lambda_mode == LambdaMode::random ? "random" : "saturate"},
      {"lambda_random_max", s.noise.lambda_random_max},
  };
  doc["obstacle_sensing"] = {
      {"mode", s.obstacle_sensing == ObstacleSensing::closest_point ? "closest_point" : "circle"},
      {"closest_point_radius", s.closest_point_radius},
  };
  json agents = json::array();
  for (const auto& a : s.agents) {
    const AgentConfig& c = a.config;
    const auto& ap = c.adapt_params;
    json j;
    j["start"] = point_json(a.start);
    j["goal"] = point_json(c.goal);
    j["delta"] = c.delta;
    j["k_p"] = c.k_p;
    j["v_max"] = c.v_max;
    j["a_max"] = c.a_max;
    j["control_period"] = c.control_period;
    j["d_u_track"] = c.d_u_track;
    j["k_sigma"] = c.k_sigma;
    j["lambda_gate"] = c.lambda_gate;
    j["d_u_measurement"] = c.d_u_measurement ? json(*c.d_u_measurement) : json(nullptr);
    j["epsilon_p"] = c.cell_params.epsilon_p;
    j["epsilon_o"] = c.cell_params.epsilon_o;
    j["sensing_radius_rs"] = c.cell_params.sensing_radius_rs;
    j["disc_sides"] = c.cell_params.disc_sides;
    j["beta_D"] = ap.beta_D;
    j["k_beta"] = ap.k_beta;
    j["k_e"] = ap.k_e;
    j["d1"] = ap.d1;
    j["d2"] = ap.d2;
    j["d3"] = ap.d3;
    j["d4"] = ap.d4;
    j["eps_rot"] = ap.eps_rot;
    j["turn_sign"] = ap.turn_sign == TurnSign::left ? "left" : "right";
    j["beta_range"] = json::array({c.beta_range.lo, c.beta_range.hi});
    agents.push_back(j);
  }
  doc["agents"] = agents;
  json obstacles = json::array();
  for (const auto& o : s.obstacles) {
    obstacles.push_back({{"center", point_json(o.center)}, {"radius", o.radius}});
  }
  doc["obstacles"] = obstacles;
  if (s.forest) {
    json f;
    if (s.forest->seed) f["seed"] = *s.forest->seed;
    f["region"] = {{"min", point_json(s.forest->region.min)},
                   {"max", point_json(s.forest->region.max)}};
    f["count"] = s.forest->count;
    f["radius"] = s.forest->radius;
    f["min_clearance"] = s.forest->min_clearance;
    doc["forest"] = f;
  }
  json adj = json::array();
  for (const auto& row : s.adjacency) {
    json r = json::array();
    for (bool b : row) r.push_back(b ? 1 : 0);
    adj.push_back(r);
  }
  doc["adjacency"] = adj;
  doc["gamma_matrix"] = s.gamma;
  return doc.dump(2) + "\n";
}

}  // namespace rbl::cli
