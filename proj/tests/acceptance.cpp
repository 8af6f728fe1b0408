// Acceptance suite: runs every gate criterion end to end and prints one
// PASS/FAIL line per criterion. Exits with the number of failed criteria.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "provpipe/bench.hpp"
#include "provpipe/csv.hpp"
#include "provpipe/errors.hpp"
#include "provpipe/ivm.hpp"
#include "provpipe/rewrite.hpp"
#include "provpipe/sha256.hpp"
#include "provpipe/store.hpp"
#include "support/generators.hpp"

using namespace provpipe;
namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

bool bitwise_equal(const ModelParams& a, const ModelParams& b) {
    if (a.weights.size() != b.weights.size()) return false;
    if (std::bit_cast<std::uint64_t>(a.bias) != std::bit_cast<std::uint64_t>(b.bias)) {
        return false;
    }
    for (std::size_t d = 0; d < a.weights.size(); ++d) {
        if (std::bit_cast<std::uint64_t>(a.weights[d]) !=
            std::bit_cast<std::uint64_t>(b.weights[d])) {
            return false;
        }
    }
    return true;
}

SourceTables bench_tables(const GeneratedData& data) {
    return {{"customers", data.customers}, {"mails", data.mails}};
}

SourceTables null_subjects(const GeneratedData& data) {
    SourceTables tables = bench_tables(data);
    for (std::size_t r : data.affected_mail_rows) {
        tables.at("mails").rows[r][1] = Value::null();
    }
    return tables;
}

// --- criterion 1 ------------------------------------------------------------

std::string criterion_ivm_speedup() {
    BenchConfig cfg;
    cfg.sizes = {1000, 5000, 20000};
    cfg.trials = 7;
    cfg.affected_customers = 5;
    cfg.seed = 42;
    std::vector<TimingRecord> records = run_bench(cfg);

    std::map<std::size_t, TimingRecord> means;
    for (const TimingRecord& r : records) {
        if (r.trial == -1) means[r.n_mails] = r;
    }
    const TimingRecord& small = means.at(1000);
    const TimingRecord& large = means.at(20000);

    std::ostringstream detail;
    detail << "t_ivm(20k)=" << fmt(large.t_ivm_s) << "s t_full(20k)=" << fmt(large.t_full_s)
           << "s ratio=" << fmt(large.t_ivm_s / large.t_full_s)
           << " growth=" << fmt(large.t_ivm_s / small.t_ivm_s);

    if (!(large.t_ivm_s <= 0.05 * large.t_full_s)) {
        return "t_ivm exceeds 5% of t_full at 20000 mails: " + detail.str();
    }
    if (!(large.t_ivm_s <= 4.0 * small.t_ivm_s)) {
        return "t_ivm grows more than 4x from 1000 to 20000 mails: " + detail.str();
    }
    double prev = 0.0;
    for (std::size_t size : cfg.sizes) {
        double mean_full = means.at(size).t_full_s;
        if (mean_full < prev * 0.9) {
            return "t_full means are not non-decreasing across sizes";
        }
        prev = mean_full;
    }
    return "ok: " + detail.str();
}

// --- criteria 2 and 3 --------------------------------------------------------

std::string check_redaction_equivalence(const PipelineDef& def, const SourceTables& tables,
                                        const SourceTables& nulled,
                                        const RedactionRequest& request) {
    ArtifactBundle bundle = capture(def, tables);
    MaintenancePlan plan = plan_redaction(bundle, request);
    MaintenanceOutcome outcome = apply_redaction(bundle, plan, UnlearnConfig{1e-3});
    OracleResult oracle = oracle_reexecute(def, nulled, bundle.fitted);

    if (!(outcome.bundle.prepared == oracle.prepared)) {
        return "prepared data differs from re-execution";
    }
    double diff = max_abs_diff(outcome.bundle.features, oracle.features);
    if (diff > 1e-9) {
        return "feature matrices differ by " + fmt(diff);
    }
    if (outcome.bundle.labels != oracle.labels) {
        return "labels differ from re-execution";
    }
    return "";
}

std::string criterion_redaction_oracle() {
    for (std::size_t size : {1000u, 5000u, 20000u}) {
        GeneratedData data = generate_data(GenConfig::for_mails(size, 42));
        RedactionRequest request{"mails", data.affected_mail_rows, "mail_subject"};
        std::string err = check_redaction_equivalence(
            complaints_pipeline(), bench_tables(data), null_subjects(data), request);
        if (!err.empty()) return "size " + std::to_string(size) + ": " + err;
    }
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        testing::RandomFixture fx = testing::make_random_fixture(7000 + seed * 131);
        SourceTables nulled = fx.tables;
        std::size_t col = 0;
        const Schema& schema = nulled.at(fx.redaction.source).schema;
        for (std::size_t c = 0; c < schema.size(); ++c) {
            if (schema[c].name == fx.redaction.input_column) col = c;
        }
        for (std::size_t r : fx.redaction.base_rows) {
            nulled.at(fx.redaction.source).rows[r][col] = Value::null();
        }
        std::string err =
            check_redaction_equivalence(fx.def, fx.tables, nulled, fx.redaction);
        if (!err.empty()) return "fixture " + std::to_string(seed) + ": " + err;
    }
    return "ok: 3 benchmark sizes + 50 random fixtures";
}

std::string check_deletion_equivalence(const PipelineDef& def, const SourceTables& tables,
                                       const DeletionRequest& request) {
    ArtifactBundle bundle = capture(def, tables);
    MaintenanceOutcome outcome = apply_deletion(bundle, request, UnlearnConfig{1e-3});

    SourceTables reduced = tables;
    std::vector<std::size_t> sorted = request.base_rows;
    std::sort(sorted.begin(), sorted.end());
    auto& rows = reduced.at(request.source).rows;
    for (auto it = sorted.rbegin(); it != sorted.rend(); ++it) {
        rows.erase(rows.begin() + static_cast<std::ptrdiff_t>(*it));
    }
    OracleResult oracle = oracle_reexecute(def, reduced, bundle.fitted);

    if (!testing::frames_values_equal(outcome.bundle.prepared, oracle.prepared)) {
        return "surviving prepared rows differ from re-execution";
    }
    double diff = max_abs_diff(outcome.bundle.features, oracle.features);
    if (diff > 1e-9) {
        return "feature matrices differ by " + fmt(diff);
    }
    if (outcome.bundle.labels != oracle.labels) {
        return "labels differ from re-execution";
    }
    return "";
}

std::string criterion_deletion_oracle() {
    for (std::size_t size : {1000u, 5000u, 20000u}) {
        GeneratedData data = generate_data(GenConfig::for_mails(size, 42));
        DeletionRequest request{"customers", data.affected_customer_rows};
        std::string err =
            check_deletion_equivalence(complaints_pipeline(), bench_tables(data), request);
        if (!err.empty()) return "size " + std::to_string(size) + ": " + err;
    }
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        testing::RandomFixture fx = testing::make_random_fixture(9000 + seed * 131);
        std::string err = check_deletion_equivalence(fx.def, fx.tables, fx.deletion);
        if (!err.empty()) return "fixture " + std::to_string(seed) + ": " + err;
    }
    return "ok: 3 benchmark sizes + 50 random fixtures";
}

// --- criterion 4 -------------------------------------------------------------

std::string criterion_provenance_correctness() {
    std::size_t checked_rows = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        testing::FuzzCase fuzz = testing::make_fuzz_case(seed * 977 + 3);
        std::string verdict = testing::check_provenance_against_removal(fuzz);
        if (!verdict.empty()) {
            return "plan " + std::to_string(seed) + ": " + verdict;
        }
        checked_rows += run_steps(fuzz.sources, fuzz.steps, fuzz.tables).n_rows();
    }

    testing::Rng rng(123);
    for (int i = 0; i < 1000; ++i) {
        ProvenancePolynomial a = testing::random_polynomial(rng);
        ProvenancePolynomial b = testing::random_polynomial(rng);
        ProvenancePolynomial c = testing::random_polynomial(rng);
        bool laws = poly_add(a, b) == poly_add(b, a) &&
                    poly_add(poly_add(a, b), c) == poly_add(a, poly_add(b, c)) &&
                    poly_add(a, a) == a && poly_mul(a, b) == poly_mul(b, a) &&
                    poly_mul(poly_mul(a, b), c) == poly_mul(a, poly_mul(b, c)) &&
                    poly_mul(a, poly_add(b, c)) ==
                        poly_add(poly_mul(a, b), poly_mul(a, c));
        if (!laws) {
            return "semiring law violated at iteration " + std::to_string(i) + " on " +
                   a.to_string() + " / " + b.to_string() + " / " + c.to_string();
        }
    }
    return "ok: 200 plans (" + std::to_string(checked_rows) +
           " output rows) + 1000 polynomial triples";
}

// --- criterion 5 -------------------------------------------------------------

std::string criterion_matrix_prov_tiling() {
    testing::Rng rng(31337);
    for (int trial = 0; trial < 100; ++trial) {
        SourceRegistry reg;
        ProvDataFrame frame = reg.register_source(
            "s",
            {{"txt", ValueKind::Text}, {"cat", ValueKind::Text}, {"num", ValueKind::Float},
             {"label", ValueKind::Int}},
            {
                {Value::text("alpha beta"), Value::text("x"), Value::real(1.5),
                 Value::integer(1)},
                {Value::text("gamma"), Value::text("y"), Value::real(-0.5), Value::integer(0)},
                {Value::text("delta epsilon zeta"), Value::text("x"), Value::real(0.25),
                 Value::integer(1)},
            });
        std::vector<EncoderSpec> specs;
        std::size_t n_specs = 1 + rng() % 6;
        for (std::size_t s = 0; s < n_specs; ++s) {
            switch (rng() % 5) {
                case 0: specs.push_back({"txt", EncoderKind::HashEmbed, 1 + rng() % 12}); break;
                case 1: specs.push_back({"txt", EncoderKind::TokenCountScaled}); break;
                case 2: specs.push_back({"cat", EncoderKind::OneHot}); break;
                case 3: specs.push_back({"num", EncoderKind::StandardScale}); break;
                default: specs.push_back({"cat", EncoderKind::HashEmbed, 1 + rng() % 4});
            }
        }
        EncodeResult result = encode_fit(frame, specs, "label");

        std::vector<DimRange> all;
        for (const auto& [column, ranges] : result.matrix_prov) {
            all.insert(all.end(), ranges.begin(), ranges.end());
        }
        std::sort(all.begin(), all.end(),
                  [](const DimRange& a, const DimRange& b) { return a.begin < b.begin; });
        std::size_t cursor = 0;
        for (const DimRange& r : all) {
            if (r.begin != cursor || r.end <= r.begin) {
                return "ranges do not tile [0, n_dims) at trial " + std::to_string(trial);
            }
            cursor = r.end;
        }
        if (cursor != result.features.n_dims()) {
            return "ranges do not cover all dimensions at trial " + std::to_string(trial);
        }
    }

    GeneratedData data = generate_data(GenConfig::for_mails(200, 11));
    ArtifactBundle bundle = capture(complaints_pipeline(), bench_tables(data));
    if (bundle.matrix_prov.at("title").size() != 2) {
        return "title does not own exactly two dimension ranges";
    }
    return "ok: 100 random spec lists; title spans 2 ranges";
}

// --- criterion 6 -------------------------------------------------------------

std::string criterion_gradient_check() {
    testing::Rng rng(271828);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t rows = 1 + rng() % 10, dims = 1 + rng() % 10;
        FeatureMatrix X = testing::random_matrix(rng, rows, dims);
        std::vector<double> y = testing::random_labels(rng, rows);
        ModelParams params;
        params.weights.resize(dims);
        for (double& w : params.weights) {
            w = (static_cast<double>(rng() % 2001) - 1000.0) / 1000.0;
        }
        params.bias = (static_cast<double>(rng() % 2001) - 1000.0) / 1000.0;

        for (double l2 : {0.0, 0.1}) {
            Gradient analytic = logistic_gradient(params, X, y, l2);
            Gradient fd = testing::finite_difference_gradient(params, X, y, l2);
            auto rel = [](double a, double b) {
                return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
            };
            for (std::size_t d = 0; d < dims; ++d) {
                worst = std::max(worst, rel(analytic.weights[d], fd.weights[d]));
            }
            worst = std::max(worst, rel(analytic.bias, fd.bias));
        }
        if (worst > 1e-5) {
            return "relative error " + fmt(worst) + " at trial " + std::to_string(trial);
        }
    }
    return "ok: 100 instances, worst relative error " + fmt(worst);
}

// --- criterion 7 -------------------------------------------------------------

std::string criterion_unlearning_sanity() {
    testing::Rng rng(5150);
    const std::size_t n = 1000, dims = 16;
    FeatureMatrix X = testing::random_matrix(rng, n, dims, 1.0);
    std::vector<double> y = testing::random_labels(rng, n);
    TrainConfig cfg{0.5, 150, 1e-4};
    ModelParams original = train_logistic(X, y, cfg);

    // 5 redacted rows: their text-like ranges zeroed.
    std::vector<std::size_t> redacted{50, 250, 450, 650, 850};
    std::vector<FeatureMatrix::CellUpdate> updates;
    for (std::size_t r : redacted) {
        for (std::size_t d = 0; d < dims / 2; ++d) updates.push_back({r, d, 0.0});
    }
    FeatureMatrix X_after = X.with_updates(updates);

    std::vector<double> old_dense, new_dense, labels;
    for (std::size_t r : redacted) {
        auto before = X.row(r);
        auto after = X_after.row(r);
        old_dense.insert(old_dense.end(), before.begin(), before.end());
        new_dense.insert(new_dense.end(), after.begin(), after.end());
        labels.push_back(y[r]);
    }
    FeatureMatrix old_block = FeatureMatrix::from_dense(redacted.size(), dims, old_dense);
    FeatureMatrix new_block = FeatureMatrix::from_dense(redacted.size(), dims, new_dense);

    ModelParams same =
        unlearn_first_order(original, old_block, old_block, labels, UnlearnConfig{0.01});
    if (!bitwise_equal(same, original)) {
        return "identical old/new rows did not leave parameters bitwise unchanged";
    }
    ModelParams tau_zero =
        unlearn_first_order(original, old_block, new_block, labels, UnlearnConfig{0.0});
    if (!bitwise_equal(tau_zero, original)) {
        return "tau = 0 did not leave parameters bitwise unchanged";
    }

    ModelParams retrained = train_logistic(X_after, y, cfg);
    auto distance = [&](const ModelParams& p) {
        double sum = 0.0;
        for (std::size_t d = 0; d < dims; ++d) {
            double diff = p.weights[d] - retrained.weights[d];
            sum += diff * diff;
        }
        double bias_diff = p.bias - retrained.bias;
        return std::sqrt(sum + bias_diff * bias_diff);
    };
    double base = distance(original);
    double best = base;
    for (double tau : {1e-4, 1e-3, 1e-2, 1e-1}) {
        ModelParams updated =
            unlearn_first_order(original, old_block, new_block, labels, UnlearnConfig{tau});
        best = std::min(best, distance(updated));
    }
    if (!(best < base)) {
        return "no tau in the grid moved parameters toward the retrained model (base " +
               fmt(base) + ")";
    }
    return "ok: identity checks bitwise; distance " + fmt(base) + " -> " + fmt(best);
}

// --- criterion 8 -------------------------------------------------------------

std::string criterion_persistence_roundtrip() {
    fs::path dir = fs::temp_directory_path() / "provpipe_acceptance_store";
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        testing::RandomFixture fx = testing::make_random_fixture(40000 + seed * 173);
        ArtifactBundle bundle = capture(fx.def, fx.tables);
        fs::remove_all(dir);
        save_bundle(bundle, dir);
        ArtifactBundle loaded = load_bundle(dir);
        if (!(loaded == bundle)) {
            return "bundle " + std::to_string(seed) + " did not survive save/load";
        }
        if (!(loaded.features == bundle.features)) {
            return "bundle " + std::to_string(seed) + " matrix bytes changed";
        }
    }
    fs::remove_all(dir);

    // Delta completeness: re-adding old values restores the matrix bitwise.
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        testing::RandomFixture fx = testing::make_random_fixture(60000 + seed * 173);
        ArtifactBundle bundle = capture(fx.def, fx.tables);
        MaintenancePlan plan = plan_redaction(bundle, fx.redaction);
        MaintenanceOutcome outcome = apply_redaction(bundle, plan, UnlearnConfig{1e-3});
        std::vector<FeatureMatrix::CellUpdate> restore;
        for (const UpdateDelta& d : plan.deltas) {
            restore.push_back({d.row, d.dim, d.old_value});
        }
        FeatureMatrix restored = outcome.bundle.features.with_updates(restore);
        if (!(restored == bundle.features)) {
            return "deltas from fixture " + std::to_string(seed) +
                   " do not restore the matrix bitwise";
        }
    }
    return "ok: 50 bundles round-tripped; deltas restore 10 redacted matrices";
}

// --- criterion 9 -------------------------------------------------------------

std::string criterion_prompt_fidelity() {
    std::string dataprep = render_prompt(TemplateId::DataprepRewrite, "df = ...",
                                         std::vector<std::string>{"title", "country"});
    if (dataprep.find("Do not iterate over dataframes") == std::string::npos) {
        return "dataprep prompt lost its anchor phrase";
    }
    std::string encoding = render_prompt(TemplateId::EncodingRewrite, "df = ...", {});
    if (encoding.find("returns an unfitted") == std::string::npos) {
        return "encoding prompt lost its anchor phrase";
    }

    fs::path dir = fs::temp_directory_path() / "provpipe_acceptance_cassette";
    fs::remove_all(dir);
    fs::create_directories(dir);
    {
        std::string key = sha256_hex(encoding);
        std::ofstream out(dir / key, std::ios::binary);
        out << "completion \x01 bytes";
    }
    ReplayTransport transport{dir};
    std::string first = transport.send(encoding);
    std::string second = transport.send(encoding);
    fs::remove_all(dir);
    if (first != second || first != "completion \x01 bytes") {
        return "replay transport is not byte-deterministic";
    }
    return "ok: anchors present, replay byte-deterministic";
}

struct Criterion {
    int id;
    const char* name;
    std::function<std::string()> run;
};

}  // namespace

int main() {
    std::vector<Criterion> criteria = {
        {1, "ivm-speedup-ratio", criterion_ivm_speedup},
        {2, "redaction-oracle-equivalence", criterion_redaction_oracle},
        {3, "deletion-oracle-equivalence", criterion_deletion_oracle},
        {4, "provenance-correctness", criterion_provenance_correctness},
        {5, "matrix-column-provenance-tiling", criterion_matrix_prov_tiling},
        {6, "gradient-check", criterion_gradient_check},
        {7, "unlearning-sanity", criterion_unlearning_sanity},
        {8, "persistence-roundtrip", criterion_persistence_roundtrip},
        {9, "prompt-fidelity", criterion_prompt_fidelity},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        std::string verdict;
        try {
            verdict = c.run();
        } catch (const std::exception& e) {
            verdict = std::string("exception: ") + e.what();
        }
        bool passed = verdict.rfind("ok", 0) == 0;
        std::printf("%s  %d  %-32s %s\n", passed ? "PASS" : "FAIL", c.id, c.name,
                    verdict.c_str());
        std::fflush(stdout);
        if (!passed) ++failures;
    }
    return failures;
}
