#include "fffaa/pipeline.hpp"

#include "fffaa/errors.hpp"
#include "fffaa/ray_index.hpp"

#include "json.hpp"

#include <chrono>
#include <fstream>
#include <numbers>
#include <sstream>
#include <system_error>

namespace fffaa {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t).count();
}

std::string read_file(const std::filesystem::path& p, const char* what) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError(std::string("cannot read ") + what + " " + p.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_file(const std::filesystem::path& p, const std::string& data) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + p.string());
    out << data;
    if (!out.flush()) throw ConfigError("failed writing " + p.string());
}

} // namespace

PipelineResult process_program(PrintProgram program, const TriangleMesh& mesh, const PipelineConfig& config) {
    config.profile.validate();
    PipelineResult r;
    r.input_print_time = estimate_print_time(program);

    auto t = Clock::now();
    const VerticalRayIndex index(mesh);
    r.timings.index_ms = ms_since(t);

    if (!config.sweep_s.empty())
        r.sweep = sweep_slicing_plane(program, mesh, index, config.profile, config.sweep_s, config.workers);

    t = Clock::now();
    AntialiasOptions aa;
    aa.overlap_compensation = config.overlap;
    aa.workers = config.workers;
    r.antialias = antialias_program(program, mesh, index, config.profile, aa);
    r.timings.antialias_ms = ms_since(t);

    if (config.ordering) {
        t = Clock::now();
        OrderingOptions o;
        o.weighted = config.weighted_seams;
        o.node_budget = config.order_budget;
        o.workers = config.workers;
        r.ordering = order_program(program, config.profile, o);
        for (const auto& l : r.ordering)
            if (l.dropped_edges)
                program.warnings.push_back("layer " + std::to_string(l.layer) + ": dropped " +
                                           std::to_string(l.dropped_edges) + " near-tie height constraint(s) to break a cycle");
        r.timings.ordering_ms = ms_since(t);
    }

    r.output_print_time = estimate_print_time(program);
    if (!config.error_map.empty()) {
        ErrorMapOptions eo;
        eo.samples_per_mm2 = config.samples_per_mm2;
        eo.workers = config.workers;
        r.errors = error_map(mesh, program_tracks(program, config.profile.d), eo);
    }
    r.program = std::move(program);
    return r;
}

std::string stats_json(const PipelineResult& r, const PipelineConfig& config) {
    using nlohmann::json;
    const auto& st = r.antialias.stats;
    json layers = json::array();
    std::size_t subpaths = 0, edges = 0, dropped = 0;
    std::uint64_t explored = 0;
    double cost = 0.0;
    bool suboptimal = false;
    for (const auto& l : r.ordering) {
        layers.push_back({{"layer", l.layer},
                          {"subpaths", l.subpaths},
                          {"edges", l.edges},
                          {"dropped_edges", l.dropped_edges},
                          {"orders_explored", l.explored},
                          {"cost", l.cost},
                          {"suboptimal", l.suboptimal},
                          {"milliseconds", l.milliseconds}});
        subpaths += l.subpaths, edges += l.edges, dropped += l.dropped_edges, explored += l.explored, cost += l.cost;
        suboptimal = suboptimal || l.suboptimal;
    }
    json hist = json::object();
    for (const auto& [layer, h] : st.histograms)
        hist[std::to_string(layer)] = {{"lo", h.lo}, {"hi", h.hi}, {"bins", h.bins}};
    json sweep = json::array();
    for (auto [s, v] : r.sweep) sweep.push_back({{"s", s}, {"overlap_volume_mm3", v}});

    const auto& p = config.profile;
    json j{
        {"profile",
         {{"w", p.w}, {"tau", p.tau}, {"alpha_deg", p.alpha * 180.0 / std::numbers::pi}, {"h", p.h}, {"s", p.s},
          {"d", p.d}, {"f_ini", p.f_ini}, {"f_min", p.f_min}}},
        {"vertices", r.program.vertex_count()},
        {"displacement",
         {{"vertices", st.vertices_total},
          {"displaced", st.displaced},
          {"skipped_bottom_facing", st.skipped_bottom_facing},
          {"skipped_out_of_window", st.skipped_out_of_window},
          {"missed", st.missed},
          {"min_thickness", st.min_thickness},
          {"max_thickness", st.max_thickness},
          {"delta_histograms", hist}}},
        {"overlap",
         {{"enabled", config.overlap},
          {"total_volume_mm3", r.antialias.overlap.total_volume},
          {"segments", r.antialias.overlap.records.size()},
          {"clamped_segments", r.antialias.overlap.clamped_segments}}},
        {"ordering",
         {{"enabled", config.ordering},
          {"weighted", config.weighted_seams},
          {"subpaths", subpaths},
          {"edges", edges},
          {"dropped_edges", dropped},
          {"orders_explored", explored},
          {"cost", cost},
          {"suboptimal", suboptimal},
          {"layers", layers}}},
        {"sweep", sweep},
        {"timing",
         {{"parse_ms", r.timings.parse_ms},
          {"index_ms", r.timings.index_ms},
          {"antialias_ms", r.timings.antialias_ms},
          {"ordering_ms", r.timings.ordering_ms},
          {"emit_ms", r.timings.emit_ms},
          {"input_print_time_s", r.input_print_time},
          {"output_print_time_s", r.output_print_time}}},
        {"warnings", r.program.warnings},
    };
    if (r.errors) j["error_map"] = json::parse(error_summary_json(*r.errors));
    return j.dump(2) + "\n";
}

int run_pipeline(const PipelineConfig& config, std::ostream& log) {
    std::vector<std::filesystem::path> written;
    auto cleanup = [&] {
        std::error_code ec;
        for (const auto& p : written) std::filesystem::remove(p, ec);
    };
    try {
        config.profile.validate();
        if (config.gcode.empty() || config.mesh.empty() || config.out.empty())
            throw ConfigError("--gcode, --mesh and --out are required");
        for (double s : config.sweep_s)
            if (!(s >= 0.0 && s <= config.profile.h)) throw ConfigError("sweep value outside [0, h]");

        auto t = Clock::now();
        const std::string text = read_file(config.gcode, "G-code");
        PrintProgram program = parse_gcode(text);
        const double parse_ms = ms_since(t);
        const LoadedMesh mesh = load_mesh_file(config.mesh);
        if (mesh.mesh.empty()) throw GeometryError("mesh has no usable triangles");

        PipelineResult r = process_program(std::move(program), mesh.mesh, config);
        r.timings.parse_ms = parse_ms;
        if (!is_closed(mesh.mesh))
            r.program.warnings.push_back("mesh is not closed; vertices whose ray misses it stay put");

        t = Clock::now();
        const std::string out = emit_gcode(r.program);
        r.timings.emit_ms = ms_since(t);

        written.push_back(config.out);
        write_file(config.out, out);
        if (r.errors) {
            std::ostringstream s;
            if (config.error_map.extension() == ".csv") write_error_csv(*r.errors, s);
            else write_error_ply(*r.errors, s);
            written.push_back(config.error_map);
            write_file(config.error_map, s.str());
        }
        if (!config.report.empty()) {
            written.push_back(config.report);
            write_file(config.report, stats_json(r, config));
        }
        for (const auto& w : r.program.warnings) log << "warning: " << w << "\n";
        log << "displaced " << r.antialias.stats.displaced << " of " << r.antialias.stats.vertices_total
            << " vertices in " << r.timings.antialias_ms << " ms\n";
        return 0;
    } catch (const Error& e) {
        cleanup();
        log << "error: " << e.what() << "\n";
        return static_cast<int>(e.exit_code());
    } catch (const std::exception& e) {
        cleanup();
        log << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace fffaa
