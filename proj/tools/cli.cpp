#include "cli.hpp"

#include "ralign/alignkit.hpp"
#include "ralign/embedding_store.hpp"
#include "ralign/error.hpp"
#include "ralign/parallel.hpp"
#include "report.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

namespace ralign::cli {

namespace {

using report::Json;
using report::format_number;

// Canonical, re-runnable echo of the parameters that produced a report.
class CommandLine {
public:
    explicit CommandLine(std::string_view command) : text_(std::string(report::kToolName) + " " + std::string(command)) {}

    CommandLine& add(std::string_view flag, const std::string& value) {
        text_ += " " + std::string(flag) + " " + quote(value);
        return *this;
    }
    CommandLine& add(std::string_view flag, double value) { return add(flag, format_number(value)); }
    CommandLine& add(std::string_view flag, std::uint64_t value) { return add(flag, std::to_string(value)); }
    CommandLine& add_flag(std::string_view flag) {
        text_ += " " + std::string(flag);
        return *this;
    }

    const std::string& str() const noexcept { return text_; }

private:
    static std::string quote(const std::string& value) {
        const bool plain = !value.empty() && std::all_of(value.begin(), value.end(), [](char c) {
            return std::isalnum(static_cast<unsigned char>(c)) || std::string_view("_./:=,+-").find(c) != std::string_view::npos;
        });
        if (plain) return value;
        std::string quoted = "'";
        for (char c : value) {
            if (c == '\'') quoted += "'\\''";
            else quoted += c;
        }
        return quoted + "'";
    }

    std::string text_;
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw InputError("write failed for " + path.string());
}

std::vector<ItemMeta> read_metas(const std::optional<fs::path>& explicit_path, const fs::path& container,
                                 bool required) {
    const fs::path path = explicit_path ? *explicit_path : sidecar_path(container);
    if (!fs::exists(path)) {
        if (explicit_path || required) throw InputError("missing metadata file: " + path.string());
        return {};
    }
    return load_sidecar(path).items;
}

EmbeddingSet load_embeddings(const fs::path& path) {
    if (!fs::exists(path)) throw InputError("missing embedding file: " + path.string());
    return load_container(path);
}

Json strata_sizes(const StratumLabels& labels) {
    Json j = Json::object();
    for (Stratum s : kAllStrata) j[std::string(to_string(s))] = stratum_indices(labels, s).size();
    return j;
}

std::string path_str(const fs::path& p) { return p.string(); }

Json optional_path(const std::optional<fs::path>& p) { return p ? Json(p->string()) : Json(nullptr); }

MetricKind metric_from(const std::string& name) {
    if (const auto m = parse_metric(name)) return *m;
    throw ParameterError("unknown metric \"" + name + "\" (expected cosine or euclidean)");
}

void check_level(double level) {
    if (!(level > 0.0 && level < 1.0)) throw ParameterError("--level must lie in (0, 1)");
}

void check_resamples(std::size_t resamples) {
    if (resamples < kMinBootstrapResamples)
        throw ParameterError("--resamples must be at least " + std::to_string(kMinBootstrapResamples));
}

std::uint64_t pairs_of(std::size_t m) { return m < 2 ? 0 : static_cast<std::uint64_t>(m) * (m - 1) / 2; }

constexpr std::uint64_t kSaltBootstrapAesthetic = 1;
constexpr std::uint64_t kSaltBootstrapUnaesthetic = 2;
constexpr std::uint64_t kSaltOverallCi = 100;
constexpr std::uint64_t kSaltStratumCi = 200;
constexpr std::uint64_t kSaltPermutation = 300;

}  // namespace

std::string version_string() {
    return std::string(report::kToolName) + " " + std::string(report::kToolVersion) + " (report schema " +
           std::to_string(report::kSchemaVersion) + ")";
}

int cmd_convert(const ConvertOptions& opts, std::ostream& log) {
    if (!fs::exists(opts.csv)) throw InputError("missing CSV file: " + opts.csv.string());
    const auto table = load_csv(opts.csv);
    save_container(table.set, opts.out, table.metas);
    log << "wrote " << opts.out.string() << " (" << table.set.size() << " x " << table.set.dim() << ")\n";
    return 0;
}

int cmd_intra(const IntraOptions& opts, std::ostream& log) {
    check_level(opts.level);
    check_resamples(opts.resamples);
    if (opts.max_pairs == 0) throw ParameterError("--max-pairs must be positive");

    const EmbeddingSet set = load_embeddings(opts.emb);
    const auto metas = metas_for_items(set.items(), read_metas(opts.meta, opts.emb, true));
    const StratumLabels labels = bucketize(metas, opts.thresholds.lo, opts.thresholds.hi);

    const auto aesthetic = stratum_indices(labels, Stratum::Aesthetic);
    const auto unaesthetic = stratum_indices(labels, Stratum::Unaesthetic);
    const bool needs_sampling =
        pairs_of(aesthetic.size()) > opts.max_pairs || pairs_of(unaesthetic.size()) > opts.max_pairs;
    if (needs_sampling && !opts.seed) {
        throw ParameterError("stratum pair count exceeds --max-pairs; pair subsampling requires --seed");
    }
    const PairSubsample subsample{opts.max_pairs, RngSeed{opts.seed.value_or(0)}};
    const SimilaritySummary summary = stratum_delta(set, labels, opts.metric, subsample);

    CommandLine cmd("intra");
    cmd.add("--emb", path_str(opts.emb));
    if (opts.meta) cmd.add("--meta", path_str(*opts.meta));
    cmd.add("--metric", std::string(to_string(opts.metric)))
        .add("--lo", opts.thresholds.lo)
        .add("--hi", opts.thresholds.hi)
        .add("--max-pairs", opts.max_pairs);
    if (opts.seed) cmd.add("--seed", *opts.seed);
    cmd.add("--resamples", static_cast<std::uint64_t>(opts.resamples)).add("--level", opts.level).add("--out", path_str(opts.out));

    Json params;
    params["emb"] = path_str(opts.emb);
    params["meta"] = optional_path(opts.meta);
    params["metric"] = std::string(to_string(opts.metric));
    params["thresholds"] = report::thresholds_json(labels.thresholds);
    params["max_pairs"] = opts.max_pairs;
    params["seed"] = opts.seed ? Json(*opts.seed) : Json(nullptr);
    params["resamples"] = opts.resamples;
    params["level"] = opts.level;
    params["rng_algorithm"] = std::string(Rng::algorithm_id);

    Json doc = report::envelope("intra", cmd.str(), std::move(params));
    Json results;
    results["n_items"] = set.size();
    results["strata_sizes"] = strata_sizes(labels);
    results["summary"] = report::to_json(summary);
    if (summary.subsample_seed) {
        // Pair-level bootstrap of the sampled means.
        Json boot;
        boot["method"] = "percentile bootstrap over sampled pair similarities";
        const std::pair<const char*, std::pair<const std::vector<std::size_t>*, std::uint64_t>> strata[] = {
            {"aesthetic", {&aesthetic, kSaltBootstrapAesthetic}},
            {"unaesthetic", {&unaesthetic, kSaltBootstrapUnaesthetic}}};
        for (const auto& [name, info] : strata) {
            const auto values = within_pair_values(set, *info.first, opts.metric, subsample);
            boot[name] = report::to_json(
                bootstrap_ci(values, opts.resamples, derive_seed(RngSeed{*opts.seed}, info.second), opts.level));
        }
        results["bootstrap"] = std::move(boot);
    } else {
        results["bootstrap"] = nullptr;
    }
    doc["results"] = std::move(results);
    write_text(opts.out, report::dump(doc));
    log << "delta " << format_number(summary.delta) << " (" << to_string(opts.metric) << ")\n";
    return 0;
}

int cmd_align(const AlignOptions& opts, std::ostream& log) {
    check_level(opts.level);
    check_resamples(opts.resamples);

    const EmbeddingSet a = load_embeddings(opts.emb_a);
    const EmbeddingSet b = load_embeddings(opts.emb_b);
    require_same_items(a, b);
    require_valid_k(a.size(), opts.k);

    const auto metas = metas_for_items(a.items(), read_metas(opts.meta, opts.emb_a, false));
    const StratumLabels labels = bucketize(metas, opts.thresholds.lo, opts.thresholds.hi);

    AlignmentResult result = mutual_knn_alignment(a, b, opts.k, opts.metric_a, opts.metric_b);
    result = stratified_alignment(std::move(result), labels);
    const RngSeed seed{opts.seed};
    result.ci = bootstrap_ci(result.per_item, opts.resamples, derive_seed(seed, kSaltOverallCi), opts.level);

    Json per_stratum = Json::object();
    for (const auto& [stratum, mean] : result.per_stratum_mean) {
        const auto members = stratum_indices(labels, stratum);
        std::vector<double> values;
        values.reserve(members.size());
        for (std::size_t i : members) values.push_back(result.per_item[i]);
        const auto ci = bootstrap_ci(values, opts.resamples,
                                     derive_seed(seed, kSaltStratumCi + static_cast<std::uint64_t>(stratum)), opts.level);
        per_stratum[std::string(to_string(stratum))] =
            Json{{"n", members.size()}, {"mean", mean}, {"ci", report::to_json(ci)}};
    }

    Json test = nullptr;
    if (result.per_stratum_mean.contains(Stratum::Aesthetic) && result.per_stratum_mean.contains(Stratum::Unaesthetic)) {
        const TestReport t = permutation_test_diff(result.per_item, labels, Stratum::Aesthetic, Stratum::Unaesthetic,
                                                   opts.resamples, derive_seed(seed, kSaltPermutation),
                                                   opts.alternative, opts.level);
        result.p_value = t.p_value;
        test = report::to_json(t);
        test["hypothesis"] = "aesthetic minus unaesthetic mean alignment";
    }

    CommandLine cmd("align");
    cmd.add("--a", path_str(opts.emb_a)).add("--b", path_str(opts.emb_b));
    if (opts.meta) cmd.add("--meta", path_str(*opts.meta));
    cmd.add("--k", static_cast<std::uint64_t>(opts.k))
        .add("--metric-a", std::string(to_string(opts.metric_a)))
        .add("--metric-b", std::string(to_string(opts.metric_b)))
        .add("--lo", opts.thresholds.lo)
        .add("--hi", opts.thresholds.hi)
        .add("--resamples", static_cast<std::uint64_t>(opts.resamples))
        .add("--level", opts.level);
    if (opts.alternative == Alternative::TwoSided) cmd.add_flag("--two-sided");
    cmd.add("--seed", opts.seed).add("--out", path_str(opts.out));
    if (opts.per_item) cmd.add("--per-item", path_str(*opts.per_item));

    Json params;
    params["emb_a"] = path_str(opts.emb_a);
    params["emb_b"] = path_str(opts.emb_b);
    params["meta"] = optional_path(opts.meta);
    params["k"] = opts.k;
    params["metric_a"] = std::string(to_string(opts.metric_a));
    params["metric_b"] = std::string(to_string(opts.metric_b));
    params["thresholds"] = report::thresholds_json(labels.thresholds);
    params["resamples"] = opts.resamples;
    params["level"] = opts.level;
    params["alternative"] = std::string(to_string(opts.alternative));
    params["seed"] = opts.seed;
    params["rng_algorithm"] = std::string(Rng::algorithm_id);
    params["bootstrap"] = "score-level bootstrap";
    params["neighbor_graph"] = "pooled over all items";

    Json doc = report::envelope("align", cmd.str(), std::move(params));
    Json results;
    results["n_items"] = a.size();
    results["strata_sizes"] = strata_sizes(labels);
    results["overall_mean"] = result.overall_mean;
    results["overall_ci"] = report::to_json(*result.ci);
    results["null_baseline"] = expected_null_alignment(a.size(), opts.k);
    results["per_stratum"] = std::move(per_stratum);
    results["test"] = std::move(test);
    doc["results"] = std::move(results);
    write_text(opts.out, report::dump(doc));

    if (opts.per_item) {
        std::string csv = "id,stratum,alignment\n";
        for (std::size_t i = 0; i < a.size(); ++i) {
            csv += a.items()[i] + "," + std::string(to_string(labels.labels[i])) + "," +
                   format_number(result.per_item[i]) + "\n";
        }
        write_text(*opts.per_item, csv);
    }
    log << "overall alignment " << format_number(result.overall_mean) << " (k=" << opts.k << ")\n";
    return 0;
}

int cmd_layers(const LayersOptions& opts, std::ostream& log) {
    if (!fs::is_directory(opts.stack_dir)) throw InputError("not a directory: " + opts.stack_dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(opts.stack_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".raln") files.push_back(entry.path());
    }
    if (files.empty()) throw InputError("no .raln layer files in " + opts.stack_dir.string());
    std::sort(files.begin(), files.end(),
              [](const fs::path& x, const fs::path& y) { return x.filename().string() < y.filename().string(); });

    const EmbeddingSet reference = load_embeddings(opts.reference);
    std::vector<EmbeddingSet> layers;
    std::vector<std::string> names;
    for (const auto& f : files) {
        layers.push_back(load_container(f));
        names.push_back(f.stem().string());
        require_same_items(layers.back(), reference, "layer " + names.back());
    }
    const LayerStack stack(std::move(layers), std::move(names));
    require_valid_k(reference.size(), opts.k);

    const auto metas = metas_for_items(reference.items(), read_metas(opts.meta, opts.reference, false));
    const StratumLabels labels = bucketize(metas, opts.thresholds.lo, opts.thresholds.hi);
    const bool any_scored =
        std::any_of(labels.labels.begin(), labels.labels.end(), [](Stratum s) { return s != Stratum::Unscored; });

    const LayerCurve curve = layer_alignment_curve(stack, reference, opts.k, opts.metric_stack,
                                                   opts.metric_reference, any_scored ? &labels : nullptr);

    fs::path csv_path = opts.csv ? *opts.csv : fs::path(opts.out).replace_extension(".csv");

    CommandLine cmd("layers");
    cmd.add("--stack-dir", path_str(opts.stack_dir)).add("--ref", path_str(opts.reference));
    if (opts.meta) cmd.add("--meta", path_str(*opts.meta));
    cmd.add("--k", static_cast<std::uint64_t>(opts.k))
        .add("--metric-stack", std::string(to_string(opts.metric_stack)))
        .add("--metric-ref", std::string(to_string(opts.metric_reference)))
        .add("--lo", opts.thresholds.lo)
        .add("--hi", opts.thresholds.hi)
        .add("--out", path_str(opts.out))
        .add("--csv", path_str(csv_path));

    Json params;
    params["stack_dir"] = path_str(opts.stack_dir);
    params["reference"] = path_str(opts.reference);
    params["meta"] = optional_path(opts.meta);
    params["k"] = opts.k;
    params["metric_stack"] = std::string(to_string(opts.metric_stack));
    params["metric_reference"] = std::string(to_string(opts.metric_reference));
    params["thresholds"] = report::thresholds_json(labels.thresholds);
    params["layer_order"] = "lexicographic file name";
    params["neighbor_graph"] = "pooled over all items";

    Json doc = report::envelope("layers", cmd.str(), std::move(params));
    Json results;
    results["n_items"] = reference.size();
    results["n_layers"] = stack.size();
    results["stratified"] = any_scored;
    results["null_baseline"] = expected_null_alignment(reference.size(), opts.k);
    results["curve"] = report::to_json(curve);
    results["csv"] = path_str(csv_path);
    doc["results"] = std::move(results);
    write_text(opts.out, report::dump(doc));
    write_text(csv_path, report::curve_csv(curve));
    log << "wrote " << curve.points.size() << " layer points\n";
    return 0;
}

int cmd_synth(const SynthOptions& opts, std::ostream& log) {
    const auto& spec = opts.spec;
    const synth::Fixture fixture = synth::generate(spec);
    fs::create_directories(opts.out_dir);

    std::vector<std::string> written;
    auto save = [&](const EmbeddingSet& set, const fs::path& path, const std::vector<ItemMeta>& metas) {
        save_container(set, path, metas);
        written.push_back(fs::relative(path, opts.out_dir).generic_string());
    };
    if (const auto* pair = std::get_if<synth::PairFixture>(&fixture)) {
        save(pair->a, opts.out_dir / "a.raln", pair->metas);
        save(pair->b, opts.out_dir / "b.raln", pair->metas);
    } else {
        const auto& stack = std::get<synth::StackFixture>(fixture);
        save(stack.reference, opts.out_dir / "reference.raln", stack.metas);
        fs::create_directories(opts.out_dir / "layers");
        for (std::size_t l = 0; l < stack.stack.size(); ++l) {
            save(stack.stack.layer(l), opts.out_dir / "layers" / (stack.stack.name(l) + ".raln"), stack.metas);
        }
    }

    std::string noise_list = format_number(spec.strata_noise.aesthetic) + "," +
                             format_number(spec.strata_noise.ambiguous) + "," +
                             format_number(spec.strata_noise.unaesthetic);
    std::string schedule_list;
    for (std::size_t i = 0; i < spec.schedule.size(); ++i) {
        schedule_list += (i ? "," : "") + format_number(spec.schedule[i]);
    }

    CommandLine cmd("synth");
    cmd.add("--kind", std::string(synth::to_string(spec.kind)))
        .add("--n", static_cast<std::uint64_t>(spec.n))
        .add("--d", static_cast<std::uint64_t>(spec.d))
        .add("--noise", spec.noise)
        .add("--strata-noise", noise_list);
    if (!spec.schedule.empty()) cmd.add("--schedule", schedule_list);
    cmd.add("--center-offset", spec.center_offset).add("--seed", spec.seed.value).add("--out-dir", path_str(opts.out_dir));

    Json params;
    params["kind"] = std::string(synth::to_string(spec.kind));
    params["n"] = spec.n;
    params["d"] = spec.d;
    params["noise"] = spec.noise;
    params["strata_noise"] = Json{{"aesthetic", spec.strata_noise.aesthetic},
                                  {"ambiguous", spec.strata_noise.ambiguous},
                                  {"unaesthetic", spec.strata_noise.unaesthetic}};
    params["schedule"] = spec.schedule;
    params["center_offset"] = spec.center_offset;
    params["seed"] = spec.seed.value;
    params["rng_algorithm"] = std::string(Rng::algorithm_id);

    Json doc = report::envelope("synth", cmd.str(), std::move(params));
    doc["results"] = Json{{"files", written}};
    write_text(opts.out_dir / "synth.json", report::dump(doc));
    log << "wrote " << written.size() << " containers to " << opts.out_dir.string() << "\n";
    return 0;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Representational self-similarity and mutual-kNN alignment of embedding sets"};
    app.name(std::string(report::kToolName));
    app.set_version_flag("--version", version_string());
    app.require_subcommand(1);

    std::size_t threads = 0;
    app.add_option("--threads", threads, "Worker threads (0 = hardware concurrency); never changes results");

    // convert
    ConvertOptions convert;
    std::string convert_csv, convert_out;
    auto* c = app.add_subcommand("convert", "CSV (id,score,e0..) to RALN container + sidecar");
    c->add_option("--csv", convert_csv, "Input CSV")->required();
    c->add_option("--out", convert_out, "Output container path")->required();

    // intra
    IntraOptions intra;
    std::string intra_emb, intra_meta, intra_metric = "cosine", intra_out;
    std::uint64_t intra_seed = 0;
    auto* i = app.add_subcommand("intra", "Within-stratum self-similarity delta (aesthetic minus unaesthetic)");
    i->add_option("--emb", intra_emb, "Embedding container")->required();
    auto* intra_meta_opt = i->add_option("--meta", intra_meta, "Metadata JSON (default: container sidecar)");
    i->add_option("--metric", intra_metric, "cosine | euclidean")->capture_default_str();
    i->add_option("--lo", intra.thresholds.lo, "Lower edge of the ambiguous band")->capture_default_str();
    i->add_option("--hi", intra.thresholds.hi, "Upper edge of the ambiguous band")->capture_default_str();
    i->add_option("--max-pairs", intra.max_pairs, "Pair budget per stratum before subsampling")->capture_default_str();
    auto* intra_seed_opt = i->add_option("--seed", intra_seed, "Seed for pair subsampling and bootstrap");
    i->add_option("--resamples", intra.resamples, "Bootstrap resamples")->capture_default_str();
    i->add_option("--level", intra.level, "Confidence level")->capture_default_str();
    i->add_option("--out", intra_out, "Report JSON path")->required();

    // align
    AlignOptions align;
    std::string align_a, align_b, align_meta, align_metric_a = "cosine", align_metric_b = "euclidean", align_out,
                                                                align_per_item;
    bool two_sided = false;
    auto* a = app.add_subcommand("align", "Mutual-kNN alignment between two embedding sets, stratified");
    a->add_option("--a", align_a, "First embedding container")->required();
    a->add_option("--b", align_b, "Second embedding container")->required();
    auto* align_meta_opt = a->add_option("--meta", align_meta, "Metadata JSON (default: sidecar of --a)");
    a->add_option("--k", align.k, "Neighbors per item")->capture_default_str();
    a->add_option("--metric-a", align_metric_a, "cosine | euclidean")->capture_default_str();
    a->add_option("--metric-b", align_metric_b, "cosine | euclidean")->capture_default_str();
    a->add_option("--lo", align.thresholds.lo)->capture_default_str();
    a->add_option("--hi", align.thresholds.hi)->capture_default_str();
    a->add_option("--resamples", align.resamples, "Bootstrap and permutation resamples")->capture_default_str();
    a->add_option("--level", align.level, "Confidence level")->capture_default_str();
    a->add_flag("--two-sided", two_sided, "Two-sided permutation test");
    a->add_option("--seed", align.seed, "RNG seed")->required();
    a->add_option("--out", align_out, "Report JSON path")->required();
    auto* per_item_opt = a->add_option("--per-item", align_per_item, "Optional per-item CSV (id,stratum,alignment)");

    // layers
    LayersOptions layers;
    std::string layers_dir, layers_ref, layers_meta, metric_stack = "euclidean", metric_ref = "euclidean", layers_out,
                                                     layers_csv;
    auto* l = app.add_subcommand("layers", "Layerwise alignment curve against a reference set");
    l->add_option("--stack-dir", layers_dir, "Directory of layer containers (lexicographic order)")->required();
    l->add_option("--ref", layers_ref, "Reference embedding container")->required();
    auto* layers_meta_opt = l->add_option("--meta", layers_meta, "Metadata JSON (default: sidecar of --ref)");
    l->add_option("--k", layers.k, "Neighbors per item")->capture_default_str();
    l->add_option("--metric-stack", metric_stack, "cosine | euclidean")->capture_default_str();
    l->add_option("--metric-ref", metric_ref, "cosine | euclidean")->capture_default_str();
    l->add_option("--lo", layers.thresholds.lo)->capture_default_str();
    l->add_option("--hi", layers.thresholds.hi)->capture_default_str();
    l->add_option("--out", layers_out, "Report JSON path")->required();
    auto* layers_csv_opt = l->add_option("--csv", layers_csv, "Curve CSV path (default: --out with .csv)");

    // synth
    SynthOptions synth_opts;
    std::string kind = "rotation", out_dir;
    std::vector<double> strata_noise, schedule;
    auto* s = app.add_subcommand("synth", "Write a synthetic fixture");
    s->add_option("--kind", kind, "rotation | noise-pair | independent | planted-strata | layer-sweep")
        ->capture_default_str();
    s->add_option("--n", synth_opts.spec.n)->capture_default_str();
    s->add_option("--d", synth_opts.spec.d)->capture_default_str();
    s->add_option("--noise", synth_opts.spec.noise, "Noise level (noise-pair)")->capture_default_str();
    s->add_option("--strata-noise", strata_noise, "aesthetic,ambiguous,unaesthetic noise (planted-strata)")
        ->delimiter(',');
    s->add_option("--schedule", schedule, "Per-layer noise levels (layer-sweep)")->delimiter(',');
    s->add_option("--center-offset", synth_opts.spec.center_offset, "Norm of a shared latent mean")
        ->capture_default_str();
    s->add_option("--seed", synth_opts.spec.seed.value, "RNG seed")->required();
    s->add_option("--out-dir", out_dir, "Output directory")->required();

    std::vector<std::string> argv_storage;
    argv_storage.push_back(std::string(report::kToolName));
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& arg : argv_storage) argv.push_back(arg.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : exit_code(ErrorCategory::Parameter);
    }

    try {
        parallel::set_thread_count(threads);
        if (c->parsed()) {
            convert.csv = convert_csv;
            convert.out = convert_out;
            return cmd_convert(convert, out);
        }
        if (i->parsed()) {
            intra.emb = intra_emb;
            if (intra_meta_opt->count()) intra.meta = intra_meta;
            intra.metric = metric_from(intra_metric);
            if (intra_seed_opt->count()) intra.seed = intra_seed;
            intra.out = intra_out;
            return cmd_intra(intra, out);
        }
        if (a->parsed()) {
            align.emb_a = align_a;
            align.emb_b = align_b;
            if (align_meta_opt->count()) align.meta = align_meta;
            align.metric_a = metric_from(align_metric_a);
            align.metric_b = metric_from(align_metric_b);
            align.alternative = two_sided ? Alternative::TwoSided : Alternative::Greater;
            align.out = align_out;
            if (per_item_opt->count()) align.per_item = align_per_item;
            return cmd_align(align, out);
        }
        if (l->parsed()) {
            layers.stack_dir = layers_dir;
            layers.reference = layers_ref;
            if (layers_meta_opt->count()) layers.meta = layers_meta;
            layers.metric_stack = metric_from(metric_stack);
            layers.metric_reference = metric_from(metric_ref);
            layers.out = layers_out;
            if (layers_csv_opt->count()) layers.csv = layers_csv;
            return cmd_layers(layers, out);
        }
        if (s->parsed()) {
            const auto parsed_kind = synth::parse_kind(kind);
            if (!parsed_kind) throw InputError("unknown fixture kind \"" + kind + "\"");
            synth_opts.spec.kind = *parsed_kind;
            if (!strata_noise.empty()) {
                if (strata_noise.size() != 3) throw InputError("--strata-noise takes exactly three values");
                synth_opts.spec.strata_noise = {strata_noise[0], strata_noise[1], strata_noise[2]};
            }
            synth_opts.spec.schedule = schedule;
            synth_opts.out_dir = out_dir;
            try {
                synth::validate(synth_opts.spec);
            } catch (const ParameterError& e) {
                throw InputError(std::string("invalid synth spec: ") + e.what());
            }
            return cmd_synth(synth_opts, out);
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code(e.category());
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code(ErrorCategory::Input);
    }
    return 1;
}

}  // namespace ralign::cli
