#include "riskplan/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace riskplan {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& message) {
    throw ConfigError("config error at " + path + ": " + message);
}

const json& require(const json& j, const char* key, const std::string& path) {
    const auto it = j.find(key);
    if (it == j.end()) {
        fail(path + "." + key, "missing required field");
    }
    return *it;
}

template <typename T>
T get_as(const json& j, const char* key, const std::string& path) {
    try {
        return require(j, key, path).get<T>();
    } catch (const json::exception& e) {
        fail(path + "." + key, e.what());
    }
}

template <typename T>
T get_or(const json& j, const char* key, const std::string& path, T fallback) {
    const auto it = j.find(key);
    if (it == j.end()) {
        return fallback;
    }
    try {
        return it->get<T>();
    } catch (const json::exception& e) {
        fail(path + "." + key, e.what());
    }
}

Vec2 vec2_from(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2) {
        fail(path, "expected [x, y]");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

json vec2_to(Vec2 v) { return json::array({v.x, v.y}); }

RiskMetric metric_from(const json& j, const std::string& path) {
    RiskMetric m;
    m.kind = metric_kind_from_string(get_as<std::string>(j, "type", path));
    m.beta = get_or<double>(j, "beta", path, 0.05);
    m.tail = tail_from_string(get_or<std::string>(j, "tail", path, "upper"));
    try {
        m.validate();
    } catch (const std::exception& e) {
        fail(path, e.what());
    }
    return m;
}

json metric_to(const RiskMetric& m) {
    return {{"type", to_string(m.kind)}, {"beta", m.beta}, {"tail", to_string(m.tail)}};
}

Obstacle obstacle_from(const json& j, const std::string& path) {
    const auto type = get_as<std::string>(j, "type", path);
    if (type == "rect") {
        return Rect{vec2_from(require(j, "min", path), path + ".min"),
                    vec2_from(require(j, "max", path), path + ".max")};
    }
    if (type == "circle") {
        return Circle{vec2_from(require(j, "center", path), path + ".center"),
                      get_as<double>(j, "radius", path)};
    }
    fail(path + ".type", "expected 'rect' or 'circle'");
}

json obstacle_to(const Obstacle& o) {
    if (std::holds_alternative<Rect>(o)) {
        const Rect& r = std::get<Rect>(o);
        return {{"type", "rect"}, {"min", vec2_to(r.min)}, {"max", vec2_to(r.max)}};
    }
    const Circle& c = std::get<Circle>(o);
    return {{"type", "circle"}, {"center", vec2_to(c.center)}, {"radius", c.radius}};
}

GoalRegion goal_from(const json& j, const std::string& path) {
    const auto type = get_as<std::string>(j, "type", path);
    if (type == "circle") {
        return Circle{vec2_from(require(j, "center", path), path + ".center"),
                      get_as<double>(j, "radius", path)};
    }
    if (type == "rect") {
        return Rect{vec2_from(require(j, "min", path), path + ".min"),
                    vec2_from(require(j, "max", path), path + ".max")};
    }
    fail(path + ".type", "expected 'circle' or 'rect'");
}

json goal_to(const GoalRegion& g) {
    if (std::holds_alternative<Circle>(g)) {
        const Circle& c = std::get<Circle>(g);
        return {{"type", "circle"}, {"center", vec2_to(c.center)}, {"radius", c.radius}};
    }
    const Rect& r = std::get<Rect>(g);
    return {{"type", "rect"}, {"min", vec2_to(r.min)}, {"max", vec2_to(r.max)}};
}

WorldConfig world_from(const json& j, const std::string& path) {
    WorldConfig w;
    const json& b = require(j, "bounds", path);
    if (!b.is_array() || b.size() != 4) {
        fail(path + ".bounds", "expected [xmin, ymin, xmax, ymax]");
    }
    w.bounds = Rect{{b[0].get<double>(), b[1].get<double>()},
                    {b[2].get<double>(), b[3].get<double>()}};
    if (const auto it = j.find("obstacles"); it != j.end()) {
        int idx = 0;
        for (const json& o : *it) {
            w.obstacles.push_back(
                obstacle_from(o, path + ".obstacles[" + std::to_string(idx++) + "]"));
        }
    }
    if (const auto it = j.find("sources"); it != j.end()) {
        int idx = 0;
        for (const json& s : *it) {
            const std::string spath = path + ".sources[" + std::to_string(idx++) + "]";
            HazardSource src;
            src.center = vec2_from(require(s, "center", spath), spath + ".center");
            src.gain = get_or<double>(s, "k", spath, 100.0);
            src.tau = get_or<double>(s, "tau", spath, 0.0);
            if (const auto d = s.find("decay"); d != s.end()) {
                src.decay = vec2_from(*d, spath + ".decay");
            }
            w.sources.push_back(src);
        }
    }
    w.sensor_noise_variance = get_or<double>(j, "sigma_n2", path, 0.5);
    w.sdf_resolution = get_or<double>(j, "sdf_resolution", path, 0.1);
    w.literal_exponents = get_or<bool>(j, "literal_exponents", path, false);
    return w;
}

json world_to(const WorldConfig& w) {
    json j{{"bounds", json::array({w.bounds.min.x, w.bounds.min.y, w.bounds.max.x,
                                   w.bounds.max.y})},
           {"sigma_n2", w.sensor_noise_variance},
           {"sdf_resolution", w.sdf_resolution},
           {"literal_exponents", w.literal_exponents}};
    j["obstacles"] = json::array();
    for (const Obstacle& o : w.obstacles) {
        j["obstacles"].push_back(obstacle_to(o));
    }
    j["sources"] = json::array();
    for (const HazardSource& s : w.sources) {
        j["sources"].push_back({{"center", vec2_to(s.center)},
                                {"k", s.gain},
                                {"tau", s.tau},
                                {"decay", vec2_to(s.decay)}});
    }
    return j;
}

}  // namespace

Scenario scenario_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }

    Scenario s;
    s.id = get_as<std::string>(j, "id", "$");
    s.world = world_from(require(j, "world", "$"), "$.world");

    const json& c = require(j, "constraint", "$");
    s.constraint.alpha = get_as<double>(c, "alpha", "$.constraint");
    s.constraint.gamma = get_or<double>(c, "gamma", "$.constraint", 0.1);
    s.constraint.metric = metric_from(require(c, "metric", "$.constraint"), "$.constraint.metric");
    try {
        s.constraint.validate();
    } catch (const std::exception& e) {
        fail("$.constraint", e.what());
    }

    if (const auto it = j.find("kernel"); it != j.end()) {
        s.kernel.signal_variance = get_or<double>(*it, "signal_variance", "$.kernel", 50.0);
        if (const auto ls = it->find("lengthscales"); ls != it->end()) {
            if (!ls->is_array() || ls->size() != 2) {
                fail("$.kernel.lengthscales", "expected [lx, ly]");
            }
            s.kernel.lengthscales = {(*ls)[0].get<double>(), (*ls)[1].get<double>()};
        }
        try {
            s.kernel.validate();
        } catch (const std::exception& e) {
            fail("$.kernel", e.what());
        }
    }

    s.start = vec2_from(require(j, "start", "$"), "$.start");
    s.goal = goal_from(require(j, "goal", "$"), "$.goal");
    s.seed = get_or<std::uint64_t>(j, "seed", "$", 1);

    const json& p = require(j, "planner", "$");
    const auto type = get_as<std::string>(p, "type", "$.planner");
    if (type == "graph") {
        s.planner = PlannerChoice::Graph;
        GraphPlannerConfig& g = s.graph;
        g.budget_seconds = get_or<double>(p, "budget_seconds", "$.planner", 3.0);
        g.deterministic_batches = get_or<int>(p, "deterministic_batches", "$.planner", 4);
        g.params.batch_size = get_or<int>(p, "batch_size", "$.planner", 100);
        g.params.rgg_tuning = get_or<double>(p, "rgg_tuning", "$.planner", 1.5);
        g.params.edge_step = get_or<double>(p, "edge_step", "$.planner", 0.1);
        g.params.goal_samples_per_batch =
            get_or<int>(p, "goal_samples_per_batch", "$.planner", 5);
        g.step_length = get_or<double>(p, "step_length", "$.planner", 0.25);
        g.trigger.beta_prime = get_or<double>(p, "beta_prime", "$.planner", 0.01);
        g.trigger.stride = get_or<int>(p, "trigger_stride", "$.planner", 1);
        g.max_steps = get_or<int>(p, "max_steps", "$.planner", 0);
    } else if (type == "smooth") {
        s.planner = PlannerChoice::Smooth;
        IgpEpisodeOptions& o = s.smooth.options;
        o.num_states = get_or<int>(p, "num_states", "$.planner", 50);
        o.dof = get_or<int>(p, "dof", "$.planner", 2);
        if (const auto w = p.find("weights"); w != p.end()) {
            o.weights.smoothness = get_or<double>(*w, "smoothness", "$.planner.weights", 10.0);
            o.weights.sigma_obs = get_or<double>(*w, "sigma_obs", "$.planner.weights", 1.0);
            o.weights.sigma_risk = get_or<double>(*w, "sigma_risk", "$.planner.weights", 1.0);
            o.weights.epsilon_obs = get_or<double>(*w, "epsilon_obs", "$.planner.weights", 0.5);
        }
        o.optimizer.max_iterations = get_or<int>(p, "max_iterations", "$.planner", 100);
        o.optimizer.gradient_tol = get_or<double>(p, "gradient_tol", "$.planner", 1e-6);
        o.goal_radius = get_or<double>(p, "goal_radius", "$.planner", 0.0);
        o.max_steps = get_or<int>(p, "max_steps", "$.planner", 0);
    } else {
        fail("$.planner.type", "expected 'graph' or 'smooth'");
    }
    return s;
}

std::string scenario_to_json_text(const Scenario& s) {
    json j;
    j["id"] = s.id;
    j["seed"] = s.seed;
    j["world"] = world_to(s.world);
    j["constraint"] = {{"alpha", s.constraint.alpha},
                       {"gamma", s.constraint.gamma},
                       {"metric", metric_to(s.constraint.metric)}};
    j["kernel"] = {{"signal_variance", s.kernel.signal_variance},
                   {"lengthscales",
                    json::array({s.kernel.lengthscales[0], s.kernel.lengthscales[1]})}};
    j["start"] = vec2_to(s.start);
    j["goal"] = goal_to(s.goal);
    if (s.planner == PlannerChoice::Graph) {
        const GraphPlannerConfig& g = s.graph;
        j["planner"] = {{"type", "graph"},
                        {"budget_seconds", g.budget_seconds},
                        {"deterministic_batches", g.deterministic_batches},
                        {"batch_size", g.params.batch_size},
                        {"rgg_tuning", g.params.rgg_tuning},
                        {"edge_step", g.params.edge_step},
                        {"goal_samples_per_batch", g.params.goal_samples_per_batch},
                        {"step_length", g.step_length},
                        {"beta_prime", g.trigger.beta_prime},
                        {"trigger_stride", g.trigger.stride},
                        {"max_steps", g.max_steps}};
    } else {
        const IgpEpisodeOptions& o = s.smooth.options;
        j["planner"] = {{"type", "smooth"},
                        {"num_states", o.num_states},
                        {"dof", o.dof},
                        {"weights",
                         {{"smoothness", o.weights.smoothness},
                          {"sigma_obs", o.weights.sigma_obs},
                          {"sigma_risk", o.weights.sigma_risk},
                          {"epsilon_obs", o.weights.epsilon_obs}}},
                        {"max_iterations", o.optimizer.max_iterations},
                        {"gradient_tol", o.optimizer.gradient_tol},
                        {"goal_radius", o.goal_radius},
                        {"max_steps", o.max_steps}};
    }
    return j.dump(2) + "\n";
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open scenario file " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return scenario_from_json_text(buf.str());
}

void save_scenario(const Scenario& scenario, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot write scenario file " + path);
    }
    out << scenario_to_json_text(scenario);
}

namespace {

Scenario make_fig2() {
    Scenario s;
    s.id = "fig2";
    s.seed = 7;
    s.world.bounds = Rect{{0.0, 0.0}, {20.0, 20.0}};
    s.world.sensor_noise_variance = 0.5;
    // peaks land at (6.0, 7.0) and (13.0, 12.2): straddling the diagonal
    s.world.sources = {HazardSource{{4.5, 7.0}, 100.0, 0.25, {1.1, 0.9}},
                       HazardSource{{14.5, 12.2}, 100.0, 0.75, {1.1, 0.9}}};
    s.constraint = RiskConstraint{{MetricKind::ConditionalValueAtRisk, 0.05, Tail::Upper},
                                  30.0, 0.1};
    s.start = {1.0, 1.0};
    s.goal = Circle{{19.0, 19.0}, 1.0};
    s.planner = PlannerChoice::Graph;
    s.graph.budget_seconds = 3.0;
    s.graph.deterministic_batches = 4;
    return s;
}

Scenario make_fig3() {
    Scenario s;
    s.id = "fig3";
    s.seed = 11;
    s.world.bounds = Rect{{0.0, 0.0}, {20.0, 20.0}};
    s.world.sensor_noise_variance = 0.5;
    // central obstacle, slightly above the start-goal line so the seed path
    // deterministically passes underneath
    s.world.obstacles = {Rect{{8.5, 9.0}, {11.5, 12.0}}};
    // peak lands at (10.0, 6.7), under the corridor below the obstacle
    s.world.sources = {HazardSource{{10.0, 5.2}, 100.0, 0.0, {1.1, 0.9}}};
    s.constraint = RiskConstraint{{MetricKind::ConditionalValueAtRisk, 0.2, Tail::Upper},
                                  10.0, 0.1};
    s.start = {1.0, 10.0};
    s.goal = Circle{{19.0, 10.0}, 0.5};
    s.planner = PlannerChoice::Smooth;
    s.smooth.options.num_states = 50;
    s.smooth.options.dof = 3;
    s.smooth.options.weights.sigma_obs = 0.3;
    return s;
}

Scenario make_trivial() {
    Scenario s;
    s.id = "trivial";
    s.seed = 3;
    s.world.bounds = Rect{{0.0, 0.0}, {20.0, 20.0}};
    s.world.sensor_noise_variance = 0.0;
    s.constraint = RiskConstraint{{MetricKind::ConditionalValueAtRisk, 0.05, Tail::Upper},
                                  30.0, 0.1};
    s.start = {2.0, 2.0};
    s.goal = Circle{{18.0, 18.0}, 1.0};
    s.planner = PlannerChoice::Graph;
    return s;
}

}  // namespace

std::vector<std::string> bundled_scenario_names() { return {"fig2", "fig3", "trivial"}; }

Scenario bundled_scenario(const std::string& name) {
    if (name == "fig2") return make_fig2();
    if (name == "fig3") return make_fig3();
    if (name == "trivial") return make_trivial();
    throw ConfigError("unknown bundled scenario '" + name + "'");
}

Scenario resolve_scenario(const std::string& name_or_path) {
    for (const std::string& name : bundled_scenario_names()) {
        if (name == name_or_path) {
            return bundled_scenario(name);
        }
    }
    return load_scenario(name_or_path);
}

EpisodeTrace run_scenario(const Scenario& scenario, const RunOptions& options) {
    const World world(scenario.world);
    const std::uint64_t seed = options.seed_override.value_or(scenario.seed);
    Rng rng(seed);

    if (scenario.planner == PlannerChoice::Graph) {
        PlanBudget budget;
        budget.mode = options.deterministic ? PlanBudget::Mode::Batches
                                            : PlanBudget::Mode::WallClock;
        budget.seconds = scenario.graph.budget_seconds;
        budget.batches = scenario.graph.deterministic_batches;

        GraphEpisodeOptions episode;
        episode.step_length = scenario.graph.step_length;
        episode.trigger = scenario.graph.trigger;
        episode.planner = scenario.graph.params;
        episode.max_steps = scenario.graph.max_steps;

        const PlanQuery query{scenario.start, scenario.goal, budget};
        return run_episode(world, query, scenario.constraint, scenario.kernel, episode, rng);
    }

    IgpEpisodeOptions igp = scenario.smooth.options;
    igp.measure_cold_solves = options.measure_cold_solves;
    return run_episode_igp(world, scenario.start, goal_center(scenario.goal),
                           scenario.constraint, scenario.kernel, igp, rng);
}

FieldKind field_kind_from_string(const std::string& name) {
    if (name == "truth") return FieldKind::Truth;
    if (name == "posterior-mean") return FieldKind::PosteriorMean;
    if (name == "posterior-cvar") return FieldKind::PosteriorCvar;
    if (name == "cost") return FieldKind::Cost;
    throw ConfigError("unknown field '" + name +
                      "' (truth|posterior-mean|posterior-cvar|cost)");
}

std::string export_field_csv(const Scenario& scenario, FieldKind kind, double resolution,
                             const std::vector<Vec2>& dataset_points,
                             const std::vector<double>& dataset_values) {
    if (!(resolution > 0.0)) {
        throw ConfigError("export resolution must be positive");
    }
    const World world(scenario.world);
    GpModel model(scenario.kernel, scenario.world.sensor_noise_variance, scenario.world.bounds);
    for (std::size_t i = 0; i < dataset_points.size(); ++i) {
        model.add_observation(dataset_points[i], dataset_values[i]);
    }
    const RiskMetric cvar_metric{MetricKind::ConditionalValueAtRisk,
                                 scenario.constraint.metric.beta,
                                 scenario.constraint.metric.tail};

    const Rect& b = scenario.world.bounds;
    const int nx = static_cast<int>(std::floor(b.width() / resolution)) + 1;
    const int ny = static_cast<int>(std::floor(b.height() / resolution)) + 1;

    std::ostringstream out;
    out.precision(17);
    out << "y/x";
    for (int ix = 0; ix < nx; ++ix) {
        out << ',' << b.min.x + ix * resolution;
    }
    out << '\n';
    for (int iy = 0; iy < ny; ++iy) {
        const double y = b.min.y + iy * resolution;
        out << y;
        for (int ix = 0; ix < nx; ++ix) {
            const Vec2 p{b.min.x + ix * resolution, y};
            double value = 0.0;
            switch (kind) {
                case FieldKind::Truth:
                    value = world.hazard(p);
                    break;
                case FieldKind::PosteriorMean:
                    value = model.posterior(p).mean;
                    break;
                case FieldKind::PosteriorCvar:
                    value = cvar(model.posterior(p), cvar_metric.beta, cvar_metric.tail);
                    break;
                case FieldKind::Cost:
                    value = cost(scenario.constraint, model, p);
                    break;
            }
            out << ',' << value;
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace riskplan
