#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fogbus/common.hpp"

namespace fogbus {

struct TaskSpec {
    std::string name;
    double compute_cost = 1.0;  // abstract work units
    std::uint64_t output_size_bytes = 0;

    bool operator==(const TaskSpec&) const = default;
};

struct AppSpec {
    std::string app_name;
    std::vector<TaskSpec> tasks;
    std::vector<std::pair<std::string, std::string>> edges;  // (parent, child)
    std::vector<std::string> entry_tasks;  // fed by the user's sensor
    std::vector<std::string> exit_tasks;   // results return to the user

    bool operator==(const AppSpec&) const = default;
};

class InvalidApp : public Error {
public:
    using Error::Error;
};

class CyclicDependency : public InvalidApp {
public:
    using InvalidApp::InvalidApp;
};

/// Validated DAG with index-based adjacency. Task i is app.tasks[i].
class AppGraph {
public:
    /// Throws InvalidApp (or CyclicDependency) when `app` breaks an invariant.
    explicit AppGraph(AppSpec app);

    const AppSpec& spec() const { return app_; }
    const std::string& name() const { return app_.app_name; }
    std::size_t size() const { return app_.tasks.size(); }
    const TaskSpec& task(std::size_t i) const { return app_.tasks[i]; }

    std::optional<std::size_t> index_of(const std::string& task) const;
    const std::vector<std::size_t>& parents(std::size_t i) const { return parents_[i]; }
    const std::vector<std::size_t>& children(std::size_t i) const { return children_[i]; }
    bool is_entry(std::size_t i) const { return entry_[i]; }
    bool is_exit(std::size_t i) const { return exit_[i]; }

    /// A topological order (Kahn, ties by task index).
    const std::vector<std::size_t>& topo_order() const { return order_; }

private:
    AppSpec app_;
    std::map<std::string, std::size_t> index_;
    std::vector<std::vector<std::size_t>> parents_;
    std::vector<std::vector<std::size_t>> children_;
    std::vector<bool> entry_;
    std::vector<bool> exit_;
    std::vector<std::size_t> order_;
};

/// Dependency levels: level 0 holds tasks without parents, level k tasks
/// whose deepest parent sits at level k-1. Names within a level keep app
/// order. Throws CyclicDependency.
std::vector<std::vector<std::string>> topo_levels(const AppSpec& app);

/// Conway's Game of Life workload: 62 rectangle tasks in 31 levels of two.
/// Level 0 is fed by the sensor; in every level the first rectangle is
/// subdivided by the next level and the second one is final and reports to
/// the user. Rectangle area (and with it cost and output size) halves per
/// level; the last level reports both rectangles.
AppSpec gol_app();

/// Video OCR workload: KeyFrameFilter -> OCR -> TextDedup, OCR dominant.
AppSpec vocr_app();

/// Frame size the user's sensor emits for the built-in apps.
std::uint64_t default_frame_bytes(const std::string& app_name);

class AppCatalog {
public:
    AppCatalog() = default;
    static AppCatalog builtin();

    void add(AppSpec app);
    const AppGraph& get(const std::string& name) const;  // throws InvalidArgument
    bool contains(const std::string& name) const { return apps_.count(name) > 0; }
    std::vector<std::string> names() const;

private:
    std::map<std::string, AppGraph> apps_;
};

}  // namespace fogbus
