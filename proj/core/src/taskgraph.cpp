#include "fogbus/taskgraph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>

namespace fogbus {

AppGraph::AppGraph(AppSpec app) : app_(std::move(app)) {
    const std::size_t n = app_.tasks.size();
    if (app_.app_name.empty()) throw InvalidApp("app_name is empty");
    if (n == 0) throw InvalidApp(app_.app_name + ": no tasks");
    for (std::size_t i = 0; i < n; ++i) {
        const TaskSpec& t = app_.tasks[i];
        if (t.name.empty()) throw InvalidApp(app_.app_name + ": task with empty name");
        if (!(t.compute_cost > 0.0) || !std::isfinite(t.compute_cost)) {
            throw InvalidApp(app_.app_name + "/" + t.name + ": compute_cost must be > 0");
        }
        if (!index_.emplace(t.name, i).second) throw InvalidApp(app_.app_name + ": duplicate task " + t.name);
    }
    parents_.assign(n, {});
    children_.assign(n, {});
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& [p, c] : app_.edges) {
        auto pi = index_of(p);
        auto ci = index_of(c);
        if (!pi || !ci) throw InvalidApp(app_.app_name + ": edge " + p + "->" + c + " names an unknown task");
        if (*pi == *ci) throw CyclicDependency(app_.app_name + ": self edge on " + p);
        if (!seen.emplace(*pi, *ci).second) continue;
        parents_[*ci].push_back(*pi);
        children_[*pi].push_back(*ci);
    }
    auto mark = [&](const std::vector<std::string>& names, std::vector<bool>& flags, const char* what) {
        flags.assign(n, false);
        if (names.empty()) throw InvalidApp(app_.app_name + ": no " + what + " tasks");
        for (const auto& name : names) {
            auto i = index_of(name);
            if (!i) throw InvalidApp(app_.app_name + ": unknown " + what + " task " + name);
            flags[*i] = true;
        }
    };
    mark(app_.entry_tasks, entry_, "entry");
    mark(app_.exit_tasks, exit_, "exit");

    // Kahn's algorithm, smallest index first.
    std::vector<std::size_t> indegree(n);
    for (std::size_t i = 0; i < n; ++i) indegree[i] = parents_[i].size();
    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
    for (std::size_t i = 0; i < n; ++i) {
        if (indegree[i] == 0) ready.push(i);
    }
    while (!ready.empty()) {
        const std::size_t i = ready.top();
        ready.pop();
        order_.push_back(i);
        for (std::size_t c : children_[i]) {
            if (--indegree[c] == 0) ready.push(c);
        }
    }
    if (order_.size() != n) throw CyclicDependency(app_.app_name + ": dependency cycle");

    // A task without parents can only receive input from the sensor.
    for (std::size_t i = 0; i < n; ++i) {
        if (parents_[i].empty() && !entry_[i]) {
            throw InvalidApp(app_.app_name + "/" + app_.tasks[i].name + ": no parents and not an entry task");
        }
    }
}

std::optional<std::size_t> AppGraph::index_of(const std::string& task) const {
    auto it = index_.find(task);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::vector<std::string>> topo_levels(const AppSpec& app) {
    const AppGraph g(app);
    std::vector<std::size_t> level(g.size(), 0);
    std::size_t depth = 0;
    for (std::size_t i : g.topo_order()) {
        for (std::size_t p : g.parents(i)) level[i] = std::max(level[i], level[p] + 1);
        depth = std::max(depth, level[i]);
    }
    std::vector<std::vector<std::string>> out(depth + 1);
    for (std::size_t i = 0; i < g.size(); ++i) out[level[i]].push_back(g.task(i).name);
    return out;
}

AppSpec gol_app() {
    constexpr int kLevels = 31;
    constexpr double kRootCost = 2400.0;               // work units of a level-0 rectangle
    constexpr std::uint64_t kRootOutput = 1u << 20;    // bytes of a level-0 rectangle
    constexpr std::uint64_t kMinOutput = 64;

    AppSpec app;
    app.app_name = "GameOfLife";
    auto name = [](int level, int side) { return "rect_" + std::to_string(level) + "_" + std::to_string(side); };
    for (int level = 0; level < kLevels; ++level) {
        const double area = std::ldexp(1.0, -level);
        const auto output =
            std::max<std::uint64_t>(kMinOutput, static_cast<std::uint64_t>(static_cast<double>(kRootOutput) * area));
        for (int side = 0; side < 2; ++side) {
            app.tasks.push_back(TaskSpec{name(level, side), kRootCost * area, output});
        }
        if (level > 0) {
            app.edges.emplace_back(name(level - 1, 0), name(level, 0));
            app.edges.emplace_back(name(level - 1, 0), name(level, 1));
        }
        app.exit_tasks.push_back(name(level, 1));
    }
    app.exit_tasks.push_back(name(kLevels - 1, 0));
    app.entry_tasks = {name(0, 0), name(0, 1)};
    return app;
}

AppSpec vocr_app() {
    AppSpec app;
    app.app_name = "VOCR";
    app.tasks = {
        TaskSpec{"KeyFrameFilter", 300.0, 64 * 1024},
        TaskSpec{"OCR", 6000.0, 4 * 1024},
        TaskSpec{"TextDedup", 200.0, 1024},
    };
    app.edges = {{"KeyFrameFilter", "OCR"}, {"OCR", "TextDedup"}};
    app.entry_tasks = {"KeyFrameFilter"};
    app.exit_tasks = {"TextDedup"};
    return app;
}

std::uint64_t default_frame_bytes(const std::string& app_name) {
    if (app_name == "GameOfLife") return 256 * 1024;
    if (app_name == "VOCR") return 512 * 1024;
    return 64 * 1024;
}

AppCatalog AppCatalog::builtin() {
    AppCatalog c;
    c.add(gol_app());
    c.add(vocr_app());
    return c;
}

void AppCatalog::add(AppSpec app) {
    AppGraph g(std::move(app));
    const std::string key = g.name();
    apps_.insert_or_assign(key, std::move(g));
}

const AppGraph& AppCatalog::get(const std::string& name) const {
    auto it = apps_.find(name);
    if (it == apps_.end()) throw InvalidArgument("unknown app " + name);
    return it->second;
}

std::vector<std::string> AppCatalog::names() const {
    std::vector<std::string> out;
    for (const auto& [k, _] : apps_) out.push_back(k);
    return out;
}

}  // namespace fogbus
