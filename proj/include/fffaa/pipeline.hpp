#pragma once

#include "fffaa/antialias.hpp"
#include "fffaa/evaluate.hpp"
#include "fffaa/gcode.hpp"
#include "fffaa/ordering.hpp"
#include "fffaa/profile.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fffaa {

struct PipelineConfig {
    std::filesystem::path gcode, mesh, out;
    std::filesystem::path report;    // stats JSON, optional
    std::filesystem::path error_map; // .ply or .csv, optional
    PrinterProfile profile;
    bool ordering = true;
    bool weighted_seams = false;
    std::uint64_t order_budget = 10'000'000; // search nodes per layer
    bool overlap = true;
    std::vector<double> sweep_s;
    unsigned workers = 1;
    double samples_per_mm2 = 50.0;
};

struct PipelineTimings {
    double parse_ms = 0.0, index_ms = 0.0, antialias_ms = 0.0, ordering_ms = 0.0, emit_ms = 0.0;
};

struct PipelineResult {
    PrintProgram program;
    AntialiasResult antialias;
    std::vector<LayerOrderReport> ordering;
    std::vector<std::pair<double, double>> sweep; // (s, overlap volume)
    std::optional<ErrorMap> errors;
    double input_print_time = 0.0;  // seconds
    double output_print_time = 0.0;
    PipelineTimings timings;
};

// Runs every stage on an already parsed program. The mesh is only read.
PipelineResult process_program(PrintProgram program, const TriangleMesh& mesh, const PipelineConfig& config);

std::string stats_json(const PipelineResult& result, const PipelineConfig& config);

// Reads the inputs, processes, writes every requested output and returns the
// exit code. Messages go to `log`; outputs are removed again on failure.
int run_pipeline(const PipelineConfig& config, std::ostream& log);

} // namespace fffaa
