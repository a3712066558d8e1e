#include "riskplan/trace.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace riskplan {

using nlohmann::json;

std::string to_string(EpisodeStatus status) {
    switch (status) {
        case EpisodeStatus::GoalReached: return "goal_reached";
        case EpisodeStatus::Timeout: return "timeout";
        case EpisodeStatus::PlannerFailed: return "planner_failed";
    }
    return "unknown";
}

double EpisodeTrace::path_length() const {
    double len = 0.0;
    for (std::size_t i = 1; i < steps.size(); ++i) {
        const auto& a = steps[i - 1].state;
        const auto& b = steps[i].state;
        len += distance({a[0], a[1]}, {b[0], b[1]});
    }
    return len;
}

std::string trace_to_jsonl(const EpisodeTrace& trace) {
    std::ostringstream out;
    for (const StepRecord& s : trace.steps) {
        json rec{{"step", s.step},
                 {"state", s.state},
                 {"obs", s.observation},
                 {"plan", s.plan_id},
                 {"trigger", s.trigger},
                 {"hazard", s.true_hazard}};
        if (s.opt) {
            rec["opt"] = {{"iters", s.opt->iterations},
                          {"cost", s.opt->final_cost},
                          {"lambda", s.opt->lambda},
                          {"diverged", s.opt->diverged}};
            if (s.opt->cold_iterations >= 0) {
                rec["opt"]["cold_iters"] = s.opt->cold_iterations;
            }
        }
        out << rec.dump() << '\n';
    }
    return out.str();
}

std::string plans_to_jsonl(const EpisodeTrace& trace) {
    std::ostringstream out;
    for (std::size_t id = 0; id < trace.plans.size(); ++id) {
        const Trajectory& t = trace.plans[id];
        json rec{{"plan", id}};
        json wps = json::array();
        for (const Vec2& w : t.waypoints()) {
            wps.push_back({w.x, w.y});
        }
        rec["waypoints"] = std::move(wps);
        if (t.has_headings()) {
            rec["headings"] = t.headings();
        }
        out << rec.dump() << '\n';
    }
    return out.str();
}

std::string dataset_to_csv(const EpisodeTrace& trace) {
    std::ostringstream out;
    out << "x1,x2,z\n";
    out.precision(17);
    for (std::size_t i = 0; i < trace.dataset_points.size(); ++i) {
        out << trace.dataset_points[i].x << ',' << trace.dataset_points[i].y << ','
            << trace.dataset_values[i] << '\n';
    }
    return out.str();
}

std::string meta_to_json(const EpisodeTrace& trace, const std::string& scenario_id,
                         std::uint64_t seed) {
    json meta{{"scenario", scenario_id},
              {"seed", seed},
              {"status", to_string(trace.status)},
              {"steps", trace.steps.size()},
              {"plans", trace.plans.size()},
              {"triggers", trace.trigger_count},
              {"path_length", trace.path_length()},
              {"wall_seconds", trace.wall_seconds},
              {"planning_seconds", trace.planning_seconds}};
    return meta.dump(2) + "\n";
}

namespace {
void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << content;
}
}  // namespace

void write_trace_files(const EpisodeTrace& trace, const std::string& out_dir,
                       const std::string& scenario_id, std::uint64_t seed) {
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    write_file(dir / "trace.jsonl", trace_to_jsonl(trace));
    write_file(dir / "plans.jsonl", plans_to_jsonl(trace));
    write_file(dir / "dataset.csv", dataset_to_csv(trace));
    write_file(dir / "meta.json", meta_to_json(trace, scenario_id, seed));
}

void read_dataset_csv(const std::string& path, std::vector<Vec2>& points,
                      std::vector<double>& values) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot read dataset file " + path);
    }
    points.clear();
    values.clear();
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::istringstream row(line);
        std::string cell;
        Vec2 p;
        std::getline(row, cell, ',');
        p.x = std::stod(cell);
        std::getline(row, cell, ',');
        p.y = std::stod(cell);
        std::getline(row, cell, ',');
        values.push_back(std::stod(cell));
        points.push_back(p);
    }
}

}  // namespace riskplan
