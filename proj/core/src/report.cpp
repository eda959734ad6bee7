#include "fogbus/report.hpp"

#include <fstream>

#include <fmt/format.h>
#include <json.hpp>

namespace fogbus {

using nlohmann::json;

namespace {

json stats_json(const Stats& s) {
    return {{"count", s.count}, {"mean", s.mean}, {"median", s.median}, {"p95", s.p95}};
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::string report_to_json(const MetricsReport& r) {
    json requests = json::array();
    for (const auto& m : r.requests) {
        requests.push_back({{"user", m.user},
                            {"index", m.index},
                            {"app", m.app},
                            {"request_id", m.request_id},
                            {"outcome", std::string(to_string(m.outcome))},
                            {"timed_out", m.timed_out},
                            {"forwards", m.forwards},
                            {"sent_at", m.sent_at},
                            {"sft_ms", optional_json(m.sft_ms)},
                            {"rrt_ms", optional_json(m.rrt_ms)},
                            {"response_ms", m.response_ms},
                            {"served_by", m.served_by}});
    }
    json decisions = json::array();
    for (const auto& md : r.decisions) {
        const auto& d = md.record;
        json placement = json::object();
        for (std::size_t i = 0; i < d.tasks.size(); ++i) placement[d.tasks[i]] = d.host_by_task[i];
        decisions.push_back({{"master", md.master},
                             {"request_id", d.request_id.str()},
                             {"app", d.app},
                             {"policy", d.policy},
                             {"user", d.user.str()},
                             {"placement", placement},
                             {"estimated_response_ms", d.estimated_response_ms},
                             {"dequeued_at", d.dequeued_at},
                             {"decided_at", d.decided_at},
                             {"ready_at", d.ready_at},
                             {"evaluations", d.evaluations},
                             {"distinct_evaluations", d.distinct_evaluations},
                             {"scheduling_ms", d.scheduling_ms},
                             {"reused", d.reused},
                             {"cold", d.cold}});
    }
    const auto& c = r.counters;
    json root = {{"scenario", r.scenario},
                 {"seed", r.seed},
                 {"policy", r.policy},
                 {"scaling_enabled", r.scaling_enabled},
                 {"finished_at", r.finished_at},
                 {"requests", requests},
                 {"decisions", decisions},
                 {"stats", {{"sft_ms", stats_json(r.sft)}, {"rrt_ms", stats_json(r.rrt)}, {"response_ms", stats_json(r.response)}}},
                 {"events",
                  {{"forwards", c.forwards},
                   {"scales", c.scales},
                   {"reuses", c.reuses},
                   {"cold_starts", c.cold_starts},
                   {"reuse_races", c.reuse_races},
                   {"warned", c.warned},
                   {"protocol_errors", c.protocol_errors},
                   {"masters_started", c.masters_started},
                   {"delivered", r.delivered},
                   {"drops", r.dropped},
                   {"masters", r.masters}}}};
    return root.dump(2) + "\n";
}

std::string convergence_csv(const std::vector<ConvergenceSeries>& series) {
    std::string out = "policy,seed,request_id,iteration,best_fitness_ms\n";
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.best.size(); ++i) {
            out += fmt::format("{},{},{},{},{}\n", s.policy, s.seed, s.request_id, i, s.best[i]);
        }
    }
    return out;
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? fmt::format("{}", *v) : std::string(); }

}  // namespace

std::string sft_csv(const std::vector<RequestMetrics>& requests) {
    std::string out = "user,index,app,request_id,outcome,forwards,sft_ms\n";
    for (const auto& m : requests) {
        out += fmt::format("{},{},{},{},{},{},{}\n", m.user, m.index, m.app, m.request_id, to_string(m.outcome),
                           m.forwards, opt(m.sft_ms));
    }
    return out;
}

std::string rrt_csv(const std::vector<RequestMetrics>& requests) {
    std::string out = "user,index,app,request_id,outcome,rrt_ms\n";
    for (const auto& m : requests) {
        out += fmt::format("{},{},{},{},{},{}\n", m.user, m.index, m.app, m.request_id, to_string(m.outcome),
                           opt(m.rrt_ms));
    }
    return out;
}

std::string response_csv(const std::vector<RequestMetrics>& requests) {
    std::string out = "user,index,app,request_id,frame,response_ms\n";
    for (const auto& m : requests) {
        for (std::size_t f = 0; f < m.response_ms.size(); ++f) {
            out += fmt::format("{},{},{},{},{},{}\n", m.user, m.index, m.app, m.request_id, f, m.response_ms[f]);
        }
    }
    return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    out.flush();
    if (!out) throw IoError("write failed: " + path.string());
}

std::vector<std::filesystem::path> emit_report(const MetricsReport& report, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir)) throw IoError("cannot create directory " + out_dir.string());
    const std::vector<std::pair<std::string, std::string>> files{
        {"report.json", report_to_json(report)},
        {"convergence.csv", convergence_csv(report.convergence)},
        {"sft.csv", sft_csv(report.requests)},
        {"rrt.csv", rrt_csv(report.requests)},
        {"response.csv", response_csv(report.requests)},
    };
    std::vector<std::filesystem::path> written;
    for (const auto& [name, body] : files) {
        write_text_file(out_dir / name, body);
        written.push_back(out_dir / name);
    }
    return written;
}

}  // namespace fogbus
