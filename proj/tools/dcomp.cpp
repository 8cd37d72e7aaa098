// dcomp: scale, quantize, prune, pack and inspect INT8 model weights; model
// decompression latency for partial compression plans.
//
// Exit codes: 0 ok, 2 usage, 3 bad data or format, 4 internal error.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dcomp/dcomp.hpp"

namespace {

using namespace dcomp;
using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitInternal = 4;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shortest decimal that round-trips, so text and JSON modes print identical numbers.
std::string num(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, r.ptr};
}

std::string read_text(const std::string& path) {
    const Bytes b = read_file(path);
    return {b.begin(), b.end()};
}

bool has_magic(std::span<const std::uint8_t> data, const char (&magic)[4]) {
    return data.size() >= 4 && std::equal(magic, magic + 4, data.begin());
}

std::vector<QuantizedTensor> load_container(const std::string& path, std::uint64_t* chunk_size = nullptr) {
    const Bytes file = read_file(path);
    const auto m = parse_container(file);
    if (chunk_size) *chunk_size = m.chunk_size;
    return unpack(m);
}

Bytes save_container(const std::string& path, const std::vector<QuantizedTensor>& tensors, const CompressionPlan& plan) {
    Bytes file = serialize(pack(tensors, plan));
    write_file(path, file);
    return file;
}

CompressionPlan store_plan(const std::vector<QuantizedTensor>& tensors, std::uint64_t chunk_size) {
    return make_plan(total_bytes(tensors), chunk_size, Codec::store, 0);
}

StatsMap load_stats(const std::string& path) { return read_stats_json(read_text(path)); }

void emit(const ordered_json& j) { std::cout << j.dump(2) << '\n'; }

struct Options {
    std::string in, out, weights, stats, out_weights, out_stats, plan, profile;
    double alpha = PipelineConfig{}.alpha;
    double sparsity = PipelineConfig{}.sparsity;
    std::string scope = std::string(to_string(PipelineConfig{}.scope));
    std::uint64_t chunk_size = PipelineConfig{}.chunk_size;
    std::size_t block_size = PipelineConfig{}.block_size;
    std::string codec = std::string(to_string(PipelineConfig{}.codec));
    std::uint64_t seed = PipelineConfig{}.seed;
    std::optional<double> budget;
    bool json = false;
    std::string dtype = "f64";
    std::size_t hidden = 768;
    std::size_t blocks = 2;
    std::vector<double> grid = default_alpha_grid();
    std::size_t tokens = 16;
    double size_mib = 64;
    int reps = 3;
    std::string arch = std::string(to_string(Architecture::gpu_buffer));
    std::size_t n_chunks = 0;
    double cr = 0.0;
    std::size_t buffer_chunks = 1;
};

// --- commands -----------------------------------------------------------------

int cmd_synth(const Options& o) {
    const auto layers = synth_model(default_block_specs(o.hidden, o.blocks), o.seed);
    const DType dtype = o.dtype == "f32" ? DType::f32 : DType::f64;
    write_file(o.out_weights, write_dcwt(weights_of(layers), dtype));
    std::vector<ActivationStats> stats;
    for (const auto& l : layers) stats.push_back(l.stats);
    const std::string text = write_stats_json(stats);
    write_file(o.out_stats, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
    std::uint64_t params = 0;
    for (const auto& l : layers) params += l.weights.values.size();
    std::cout << "tensors: " << layers.size() << "\nparameters: " << params << '\n';
    return kExitOk;
}

int cmd_quantize(const Options& o) {
    const auto weights = read_dcwt(read_file(o.weights));
    const auto q = quantize_model(weights, load_stats(o.stats), o.alpha);
    const Bytes file = save_container(o.out, q, store_plan(q, o.chunk_size));
    std::cout << "tensors: " << q.size() << "\nalpha: " << num(o.alpha) << "\nbytes: " << total_bytes(q)
              << "\nfile_bytes: " << file.size() << '\n';
    return kExitOk;
}

int cmd_prune(const Options& o) {
    std::uint64_t chunk_size = 0;
    const auto q = load_container(o.in, &chunk_size);
    const PruneConfig cfg{o.sparsity, o.scope == "per_row" ? PruneScope::per_row : PruneScope::per_tensor};
    const auto pruned = prune_model(q, load_stats(o.stats), cfg);
    save_container(o.out, pruned, store_plan(pruned, chunk_size));
    std::uint64_t zeros_before = 0;
    std::uint64_t zeros_after = 0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        zeros_before += static_cast<std::uint64_t>(std::count(q[i].qvalues.begin(), q[i].qvalues.end(), 0));
        zeros_after += static_cast<std::uint64_t>(std::count(pruned[i].qvalues.begin(), pruned[i].qvalues.end(), 0));
    }
    std::cout << "sparsity: " << num(o.sparsity) << "\nscope: " << o.scope << "\nzeros_before: " << zeros_before
              << "\nzeros_after: " << zeros_after << '\n';
    return kExitOk;
}

int cmd_pack(const Options& o, bool chunk_size_given) {
    std::uint64_t chunk_size = 0;
    const auto q = load_container(o.in, &chunk_size);
    if (chunk_size_given) chunk_size = o.chunk_size;
    CompressionPlan plan;
    if (!o.plan.empty()) {
        plan = plan_from_json(read_text(o.plan));
    } else {
        plan = make_plan(total_bytes(q), chunk_size, o.codec == "store" ? Codec::store : Codec::ans, o.block_size);
    }
    const auto m = pack(q, plan);
    const Bytes file = serialize(m);
    write_file(o.out, file);
    std::size_t ans_chunks = 0;
    for (const auto& c : m.chunks) ans_chunks += c.codec == Codec::ans ? 1 : 0;
    std::cout << "chunks: " << m.chunks.size() << "\nans_chunks: " << ans_chunks << "\nraw_bytes: " << m.raw_bytes()
              << "\npayload_bytes: " << m.payload_bytes() << "\nfile_bytes: " << file.size()
              << "\ncr: " << num(compression_ratio(m.raw_bytes(), m.payload_bytes())) << '\n';
    return kExitOk;
}

int cmd_unpack(const Options& o) {
    std::uint64_t chunk_size = 0;
    const auto q = load_container(o.in, &chunk_size);
    if (!o.out.empty()) save_container(o.out, q, store_plan(q, chunk_size));
    std::cout << "ok: " << q.size() << " tensors, " << total_bytes(q) << " bytes\n";
    return kExitOk;
}

int cmd_analyze(const Options& o, bool chunk_size_given) {
    const Bytes file = read_file(o.in);
    std::vector<QuantizedTensor> q;
    std::vector<DistributionReport> float_reports;
    std::uint64_t chunk_size = o.chunk_size;
    if (has_magic(file, kDcwtMagic)) {
        const auto w = read_dcwt(file);
        for (const auto& t : w) float_reports.push_back(analyze_float(t));
        q = quantize_baseline(w);
    } else {
        const auto m = parse_container(file);
        if (!chunk_size_given) chunk_size = m.chunk_size;
        q = unpack(m);
    }
    const auto a = analyze_model(q, chunk_size);

    ordered_json j;
    j["source"] = float_reports.empty() ? "container" : "weights (plain INT8)";
    j["layers"] = ordered_json::array();
    for (std::size_t i = 0; i < a.layers.size(); ++i) {
        const auto& l = a.layers[i];
        ordered_json row{{"name", l.name},
                         {"count", l.dist.count},
                         {"near_zero_fraction", l.dist.near_zero_fraction},
                         {"byte_entropy", l.dist.byte_entropy},
                         {"outliers", l.dist.outlier_count},
                         {"raw_bytes", l.raw_bytes},
                         {"compressed_bytes", l.compressed_bytes},
                         {"cr", l.cr}};
        if (!float_reports.empty()) {
            const auto& f = float_reports[i];
            row["float"] = {{"min", f.min}, {"max", f.max}, {"stddev", f.stddev}, {"near_zero_fraction", f.near_zero_fraction}};
        }
        j["layers"].push_back(row);
    }
    j["total"] = {{"raw_bytes", a.raw_bytes},
                  {"compressed_bytes", a.compressed_bytes},
                  {"cr", a.cr},
                  {"near_zero_fraction", a.near_zero_fraction},
                  {"byte_entropy", a.byte_entropy}};
    if (o.json) {
        emit(j);
        return kExitOk;
    }
    std::cout << "source: " << j["source"].get<std::string>() << '\n';
    std::cout << "name\tcount\tnear_zero\tentropy\toutliers\traw_bytes\tcompressed_bytes\tcr\n";
    for (const auto& l : a.layers) {
        std::cout << l.name << '\t' << l.dist.count << '\t' << num(l.dist.near_zero_fraction) << '\t'
                  << num(l.dist.byte_entropy) << '\t' << l.dist.outlier_count << '\t' << l.raw_bytes << '\t'
                  << l.compressed_bytes << '\t' << num(l.cr) << '\n';
    }
    std::cout << "total\t" << a.raw_bytes << '\t' << num(a.near_zero_fraction) << '\t' << num(a.byte_entropy)
              << "\t-\t" << a.raw_bytes << '\t' << a.compressed_bytes << '\t' << num(a.cr) << '\n';
    return kExitOk;
}

int cmd_bench(const Options& o) {
    Bytes data;
    std::string source;
    if (!o.in.empty()) {
        const Bytes file = read_file(o.in);
        const auto q = has_magic(file, kDcwtMagic) ? quantize_baseline(read_dcwt(file)) : unpack(file);
        data = detail::serialize_values(q);
        source = o.in;
    } else {
        data = synthetic_quantized_bytes(static_cast<std::uint64_t>(o.size_mib * 1024 * 1024), o.alpha, o.seed);
        source = "synthetic, alpha " + num(o.alpha) + ", seed " + std::to_string(o.seed);
    }
    const auto rows = bench_codecs(data, o.chunk_size, o.reps);
    if (o.json) {
        ordered_json j{{"source", source}, {"bytes", data.size()}, {"rows", ordered_json::array()}};
        for (const auto& r : rows) {
            j["rows"].push_back({{"codec", std::string(to_string(r.codec))},
                                 {"cr", r.compression_ratio},
                                 {"timing",
                                  {{"compress_mbps", r.compress_mbps},
                                   {"decompress_mbps", r.decompress_mbps},
                                   {"parallel_decompress_mbps", r.parallel_decompress_mbps},
                                   {"threads", r.threads}}}});
        }
        emit(j);
        return kExitOk;
    }
    std::cout << "source: " << source << "\nbytes: " << data.size() << '\n';
    std::cout << "codec\tcr\tcompress_MB/s[timing]\tdecompress_MB/s[timing]\tparallel_decompress_MB/s[timing]\tthreads\n";
    for (const auto& r : rows) {
        std::cout << to_string(r.codec) << '\t' << num(r.compression_ratio) << '\t' << num(r.compress_mbps) << '\t'
                  << num(r.decompress_mbps) << '\t' << num(r.parallel_decompress_mbps) << '\t' << r.threads << '\n';
    }
    return kExitOk;
}

int cmd_sweep(const Options& o) {
    const auto weights = read_dcwt(read_file(o.weights));
    const auto rows = sweep_alpha(weights, load_stats(o.stats), o.grid, o.chunk_size, o.seed, o.tokens);
    std::ostringstream csv;
    csv << "alpha,cr,near_zero_fraction,layer_error\n";
    for (const auto& r : rows) {
        csv << num(r.alpha) << ',' << num(r.cr) << ',' << num(r.near_zero_fraction) << ',' << num(r.layer_error) << '\n';
    }
    if (o.out.empty()) {
        std::cout << csv.str();
    } else {
        const std::string text = csv.str();
        write_file(o.out, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
        std::cout << "rows: " << rows.size() << '\n';
    }
    return kExitOk;
}

void print_report(const LatencyReport& r) {
    std::cout << "architecture: " << to_string(r.architecture) << "\nper_sample_latency_s: " << num(r.per_sample_latency)
              << "\nbottleneck: " << to_string(r.bottleneck) << "\nloading_time_s: " << num(r.loading_time)
              << "\ndecompression_time_s: " << num(r.decompression_time) << "\ncompute_time_s: " << num(r.compute_time)
              << "\nmemory_used_gpu_bytes: " << num(r.memory_used_gpu)
              << "\nmemory_used_cpu_bytes: " << num(r.memory_used_cpu) << '\n';
}

int cmd_simulate(const Options& o, bool chunk_size_given) {
    const HardwareProfile h = profile_from_json(read_text(o.profile));
    const Architecture arch = *parse_architecture(o.arch);

    CompressionPlan plan;
    std::vector<double> crs;
    if (!o.in.empty()) {
        const auto m = parse_container(read_file(o.in));
        std::tie(plan, crs) = plan_of(m);
    } else {
        if (o.cr < 1.0) throw UsageError("simulate: --cr >= 1 is required unless --in gives a container");
        if (!o.plan.empty()) {
            plan = plan_from_json(read_text(o.plan));
        } else {
            if (o.n_chunks == 0) throw UsageError("simulate: give --plan, --in, or --n-chunks");
            const std::uint64_t cs = chunk_size_given ? o.chunk_size : kDefaultChunkSize;
            plan = o.block_size == 0 ? CompressionPlan::all_store(o.n_chunks, cs)
                                     : CompressionPlan::block_rule(o.n_chunks, cs, o.block_size);
        }
        crs.assign(plan.n_chunks, o.cr);
    }

    if (o.budget) {
        // Uniform estimate: mean CR of compressed chunks, or --cr.
        double estimate = o.cr;
        if (!o.in.empty()) {
            double sum = 0.0;
            std::size_t n = 0;
            for (std::size_t i = 0; i < plan.n_chunks; ++i) {
                if (plan.compressed_mask[i]) sum += crs[i], ++n;
            }
            estimate = n > 0 ? sum / static_cast<double>(n) : 1.0;
        }
        const auto res = plan_partial(h, plan.n_chunks, plan.chunk_size, estimate, *o.budget, arch);
        if (!res.feasible) {
            std::cerr << "warning: no plan meets the latency budget of " << num(*o.budget)
                      << " s; falling back to all-store\n";
        }
        if (o.json) {
            ordered_json j{{"budget", *o.budget},
                           {"cr_estimate", estimate},
                           {"feasible", res.feasible},
                           {"block_size", res.plan.block_size},
                           {"plan", to_json(res.plan)},
                           {"report", to_json(res.report)}};
            emit(j);
        } else {
            std::cout << "budget_s: " << num(*o.budget) << "\ncr_estimate: " << num(estimate)
                      << "\nfeasible: " << (res.feasible ? "true" : "false") << "\nblock_size: " << res.plan.block_size
                      << "\ncompressed_chunks: " << res.plan.compressed_count() << '/' << res.plan.n_chunks << '\n';
            print_report(res.report);
        }
        return kExitOk;
    }

    const auto rep = latency(h, plan, arch, crs, o.buffer_chunks);
    if (o.json) {
        emit({{"plan", to_json(plan)}, {"report", to_json(rep)}});
    } else {
        std::cout << "chunks: " << plan.n_chunks << "\ncompressed_chunks: " << plan.compressed_count()
                  << "\nblock_size: " << plan.block_size << '\n';
        print_report(rep);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Compression-aware INT8 weight toolkit: scale, quantize, prune, entropy-code, and model load latency."};
    app.require_subcommand(1);
    app.set_version_flag("--version", "dcomp 1.0.0");
    app.footer("Environment: DCOMP_THREADS caps worker threads.\nExit codes: 0 ok, 2 usage, 3 data/format, 4 internal.");
    Options o;

    const auto chunk_size_check = CLI::Range(kMinChunkSize, std::numeric_limits<std::uint64_t>::max());
    auto add_chunk_size = [&](CLI::App* sub, const std::string& help) {
        return sub->add_option("--chunk-size", o.chunk_size, help)
            ->transform(CLI::AsSizeValue(false))
            ->check(chunk_size_check)
            ->default_str("16MiB");
    };
    auto add_alpha = [&](CLI::App* sub) {
        sub->add_option("--alpha", o.alpha, "scaling exponent, s_i = max|X_i|^alpha")
            ->check(CLI::Range(0.0, 1.0))
            ->capture_default_str();
    };

    auto* synth = app.add_subcommand("synth", "generate a synthetic model (DCWT weights + stats JSON)");
    synth->add_option("--out-weights", o.out_weights, "output DCWT file")->required();
    synth->add_option("--out-stats", o.out_stats, "output stats JSON")->required();
    synth->add_option("--seed", o.seed, "RNG seed")->capture_default_str();
    synth->add_option("--hidden", o.hidden, "hidden width")->check(CLI::PositiveNumber)->capture_default_str();
    synth->add_option("--blocks", o.blocks, "transformer blocks")->check(CLI::PositiveNumber)->capture_default_str();
    synth->add_option("--dtype", o.dtype, "value type written")->check(CLI::IsMember({"f32", "f64"}))->capture_default_str();

    auto* quant = app.add_subcommand("quantize", "scale and quantize weights into a DCC1 container (stored chunks)");
    quant->add_option("--weights", o.weights, "DCWT weights")->required();
    quant->add_option("--stats", o.stats, "stats JSON")->required();
    quant->add_option("--out", o.out, "output container")->required();
    add_alpha(quant);
    add_chunk_size(quant, "chunk size of the output container");

    auto* prune_cmd = app.add_subcommand("prune", "zero the lowest-scoring INT8 weights of a container");
    prune_cmd->add_option("--in", o.in, "input container")->required();
    prune_cmd->add_option("--stats", o.stats, "stats JSON")->required();
    prune_cmd->add_option("--out", o.out, "output container")->required();
    prune_cmd->add_option("--sparsity", o.sparsity, "fraction of weights to zero")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    prune_cmd->add_option("--scope", o.scope, "selection scope")
        ->check(CLI::IsMember({"per_tensor", "per_row"}))
        ->capture_default_str();

    auto* pack_cmd = app.add_subcommand("pack", "entropy-code a container with a block-rule or JSON plan");
    pack_cmd->add_option("--in", o.in, "input container")->required();
    pack_cmd->add_option("--out", o.out, "output container")->required();
    pack_cmd->add_option("--codec", o.codec, "store: no coding; ans: block rule")
        ->check(CLI::IsMember({"store", "ans"}))
        ->capture_default_str();
    pack_cmd->add_option("--block-size", o.block_size, "compress the last chunk of every N")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    pack_cmd->add_option("--plan", o.plan, "plan JSON (overrides --codec/--block-size)");
    auto* pack_cs = add_chunk_size(pack_cmd, "chunk size (default: keep the input's)");

    auto* unpack_cmd = app.add_subcommand("unpack", "verify and decode a container, optionally rewriting it uncompressed");
    unpack_cmd->add_option("--in", o.in, "input container")->required();
    unpack_cmd->add_option("--out", o.out, "output container (stored chunks)");

    auto* analyze = app.add_subcommand("analyze", "per-layer near-zero fraction, entropy and CR");
    analyze->add_option("--in", o.in, "container or DCWT weights (analyzed as plain INT8)")->required();
    analyze->add_flag("--json", o.json, "JSON output");
    auto* analyze_cs = add_chunk_size(analyze, "chunk size for CR (default: the container's)");

    auto* bench = app.add_subcommand("bench", "codec throughput and CR");
    bench->add_option("--in", o.in, "container or DCWT (default: synthetic weights)");
    bench->add_option("--size-mib", o.size_mib, "minimum synthetic size")->check(CLI::PositiveNumber)->capture_default_str();
    add_alpha(bench);
    bench->add_option("--seed", o.seed, "RNG seed")->capture_default_str();
    bench->add_option("--reps", o.reps, "timed repetitions (median)")->check(CLI::PositiveNumber)->capture_default_str();
    bench->add_flag("--json", o.json, "JSON output");
    add_chunk_size(bench, "chunk size");

    auto* sweep = app.add_subcommand("sweep", "CR, near-zero fraction and W8A8 layer error over an alpha grid (CSV)");
    sweep->add_option("--weights", o.weights, "DCWT weights")->required();
    sweep->add_option("--stats", o.stats, "stats JSON")->required();
    sweep->add_option("--grid", o.grid, "alpha values")->delimiter(',')->check(CLI::Range(0.0, 1.0))->default_str("0,0.1,...,1");
    sweep->add_option("--seed", o.seed, "seed of the synthetic calibration activations")->capture_default_str();
    sweep->add_option("--tokens", o.tokens, "calibration tokens per layer")->check(CLI::PositiveNumber)->capture_default_str();
    sweep->add_option("--out", o.out, "CSV file (default: stdout)");
    add_chunk_size(sweep, "chunk size for CR");

    auto* sim = app.add_subcommand("simulate", "per-sample latency of a plan, or the plan meeting --budget");
    sim->add_option("--profile", o.profile, "hardware profile JSON")->required();
    sim->add_option("--plan", o.plan, "plan JSON");
    sim->add_option("--in", o.in, "container: plan and per-chunk CR taken from it");
    sim->add_option("--n-chunks", o.n_chunks, "chunks of a block-rule plan");
    sim->add_option("--block-size", o.block_size, "block size (0 = all-store)")->capture_default_str();
    sim->add_option("--cr", o.cr, "compression ratio of compressed chunks");
    sim->add_option("--arch", o.arch, "memory architecture")
        ->check(CLI::IsMember({"gpu_only", "gpu_buffer", "gpu_cpu", "storage"}))
        ->capture_default_str();
    sim->add_option("--buffer-chunks", o.buffer_chunks, "decompression buffer size in chunks")->capture_default_str();
    sim->add_option("--budget", o.budget, "latency budget in seconds; picks the smallest block size meeting it")
        ->check(CLI::PositiveNumber);
    sim->add_flag("--json", o.json, "JSON output");
    auto* sim_cs = add_chunk_size(sim, "chunk size of a --n-chunks plan");

    try {
        app.parse(argc, argv);
        if (synth->parsed()) return cmd_synth(o);
        if (quant->parsed()) return cmd_quantize(o);
        if (prune_cmd->parsed()) return cmd_prune(o);
        if (pack_cmd->parsed()) return cmd_pack(o, pack_cs->count() > 0);
        if (unpack_cmd->parsed()) return cmd_unpack(o);
        if (analyze->parsed()) return cmd_analyze(o, analyze_cs->count() > 0);
        if (bench->parsed()) return cmd_bench(o);
        if (sweep->parsed()) return cmd_sweep(o);
        if (sim->parsed()) return cmd_simulate(o, sim_cs->count() > 0);
        return kExitUsage;
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
}
