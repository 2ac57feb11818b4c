#include <bagstack/error.hpp>
#include <bagstack/model_io.hpp>

#include <charconv>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>

namespace bagstack {

namespace {

constexpr std::string_view kMagic = "bagstack-model v1";

template <class Int>
Int parse_int_strict(std::string_view text) {
    Int v{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        throw Error(ErrorKind::parse, "expected an integer, got '" + std::string(text) + "'");
    }
    return v;
}

std::vector<std::string_view> split_list(std::string_view s) {
    std::vector<std::string_view> out;
    while (true) {
        const auto comma = s.find(',');
        out.push_back(s.substr(0, comma));
        if (comma == std::string_view::npos) break;
        s.remove_prefix(comma + 1);
    }
    return out;
}

/// Whitespace-separated token stream over the whole model file.
class Tokens {
public:
    explicit Tokens(std::istream& in) : in_(in) {}

    std::string next() {
        std::string t;
        if (!(in_ >> t)) throw Error(ErrorKind::parse, "unexpected end of model file");
        return t;
    }
    void expect(std::string_view word) {
        const auto t = next();
        if (t != word) throw Error(ErrorKind::parse, "expected '" + std::string(word) + "', got '" + t + "'");
    }
    double number() { return parse_double_strict(next()); }
    template <class Int = std::int64_t>
    Int integer() { return parse_int_strict<Int>(next()); }
    std::size_t count() {
        const auto v = integer<std::int64_t>();
        if (v < 0) throw Error(ErrorKind::parse, "negative count in model file");
        return static_cast<std::size_t>(v);
    }

private:
    std::istream& in_;
};

// --- writing ------------------------------------------------------------------

void write_trained(std::ostream& out, const TrainedModel& m) {
    out << "model " << to_string(m.spec.kind) << '\n';
    out << "spec";
    for (const auto& [k, v] : spec_fields(m.spec)) out << ' ' << k << '=' << v;
    out << '\n';
    out << "n_features " << m.n_features << '\n';
    if (const auto* tree = std::get_if<TreeModel>(&m.params)) {
        out << "nodes " << tree->nodes.size() << '\n';
        for (const auto& n : tree->nodes) {
            out << n.feature << ' ' << format_double(n.threshold) << ' ' << n.left << ' ' << n.right;
            for (double p : n.distribution) out << ' ' << format_double(p);
            out << '\n';
        }
    } else if (const auto* gbm = std::get_if<GbmModel>(&m.params)) {
        out << "initial";
        for (double s : gbm->initial_scores) out << ' ' << format_double(s);
        out << '\n' << "rounds " << gbm->rounds.size() << '\n';
        for (const auto& round : gbm->rounds) {
            for (const auto& tree : round) {
                out << "tree " << tree.nodes.size() << '\n';
                for (const auto& n : tree.nodes) {
                    out << n.feature << ' ' << format_double(n.threshold) << ' ' << n.left << ' ' << n.right << ' '
                        << format_double(n.value) << '\n';
                }
            }
        }
    } else {
        const auto& lr = std::get<LogisticModel>(m.params);
        out << "weights " << lr.weights.rows() << ' ' << lr.weights.cols() << '\n';
        for (std::size_t j = 0; j < lr.weights.rows(); ++j) {
            for (std::size_t c = 0; c < lr.weights.cols(); ++c) {
                out << (c ? " " : "") << format_double(lr.weights(j, c));
            }
            out << '\n';
        }
        out << "bias";
        for (double b : lr.bias) out << ' ' << format_double(b);
        out << '\n';
    }
    out << "end model\n";
}

void write_plan(std::ostream& out, const BootstrapPlan& plan) {
    out << "plan " << plan.n << ' ' << plan.k << ' ' << plan.master_seed << '\n';
}

// --- reading ------------------------------------------------------------------

void check_tree_links(std::size_t n_nodes, int left, int right, std::size_t self) {
    auto ok = [&](int child) { return child > static_cast<int>(self) && static_cast<std::size_t>(child) < n_nodes; };
    if (!ok(left) || !ok(right)) throw Error(ErrorKind::parse, "tree node references out of order or out of range");
}

TrainedModel read_trained(Tokens& tok) {
    tok.expect("model");
    TrainedModel m;
    m.spec.kind = parse_learner_kind(tok.next());
    tok.expect("spec");
    while (true) {
        const auto t = tok.next();
        if (t == "n_features") break;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw Error(ErrorKind::parse, "bad spec token '" + t + "'");
        set_spec_field(m.spec, std::string_view(t).substr(0, eq), std::string_view(t).substr(eq + 1));
    }
    m.n_features = tok.count();

    switch (m.spec.kind) {
        case LearnerKind::tree: {
            tok.expect("nodes");
            TreeModel tree;
            tree.nodes.resize(tok.count());
            for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
                auto& n = tree.nodes[i];
                n.feature = tok.integer<int>();
                n.threshold = tok.number();
                n.left = tok.integer<int>();
                n.right = tok.integer<int>();
                for (auto& p : n.distribution) p = tok.number();
                if (!n.is_leaf()) {
                    check_tree_links(tree.nodes.size(), n.left, n.right, i);
                    if (static_cast<std::size_t>(n.feature) >= m.n_features) throw Error(ErrorKind::parse, "split feature out of range");
                }
            }
            if (tree.nodes.empty()) throw Error(ErrorKind::parse, "tree without nodes");
            m.params = std::move(tree);
            break;
        }
        case LearnerKind::gbm: {
            GbmModel gbm;
            tok.expect("initial");
            for (auto& s : gbm.initial_scores) s = tok.number();
            tok.expect("rounds");
            gbm.rounds.resize(tok.count());
            for (auto& round : gbm.rounds) {
                for (auto& tree : round) {
                    tok.expect("tree");
                    tree.nodes.resize(tok.count());
                    if (tree.nodes.empty()) throw Error(ErrorKind::parse, "tree without nodes");
                    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
                        auto& n = tree.nodes[i];
                        n.feature = tok.integer<int>();
                        n.threshold = tok.number();
                        n.left = tok.integer<int>();
                        n.right = tok.integer<int>();
                        n.value = tok.number();
                        if (!n.is_leaf()) {
                            check_tree_links(tree.nodes.size(), n.left, n.right, i);
                            if (static_cast<std::size_t>(n.feature) >= m.n_features) throw Error(ErrorKind::parse, "split feature out of range");
                        }
                    }
                }
            }
            m.params = std::move(gbm);
            break;
        }
        case LearnerKind::logistic: {
            LogisticModel lr;
            tok.expect("weights");
            const auto rows = tok.count();
            const auto cols = tok.count();
            if (cols != kNumClasses || rows != m.n_features) throw Error(ErrorKind::parse, "logistic weight shape mismatch");
            lr.weights = Matrix(rows, cols);
            for (auto& w : lr.weights.values()) w = tok.number();
            tok.expect("bias");
            for (auto& b : lr.bias) b = tok.number();
            m.params = std::move(lr);
            break;
        }
    }
    tok.expect("end");
    tok.expect("model");
    return m;
}

BootstrapPlan read_plan(Tokens& tok) {
    tok.expect("plan");
    const auto n = tok.count();
    const auto k = tok.count();
    const auto seed = tok.integer<std::uint64_t>();
    return bootstrap_indices(n, k, seed);
}

std::vector<TrainedModel> read_members(Tokens& tok, std::string_view label) {
    tok.expect(label);
    std::vector<TrainedModel> out(tok.count());
    for (auto& m : out) m = read_trained(tok);
    return out;
}

}  // namespace

// --- spec fields ------------------------------------------------------------------

void set_spec_field(LearnerSpec& spec, std::string_view key, std::string_view value) {
    auto as_int = [&] {
        try {
            return parse_int_strict<int>(value);
        } catch (const Error&) {
            throw Error(ErrorKind::config, "'" + std::string(key) + "' expects an integer, got '" + std::string(value) + "'");
        }
    };
    auto as_double = [&] {
        try {
            return parse_double_strict(value);
        } catch (const Error&) {
            throw Error(ErrorKind::config, "'" + std::string(key) + "' expects a number, got '" + std::string(value) + "'");
        }
    };
    if (key == "kind") spec.kind = parse_learner_kind(value);
    else if (key == "tree.max_depth") spec.tree.max_depth = as_int();
    else if (key == "tree.min_samples_leaf") spec.tree.min_samples_leaf = as_int();
    else if (key == "tree.candidate_thresholds_per_feature") spec.tree.candidate_thresholds_per_feature = as_int();
    else if (key == "gbm.n_rounds") spec.gbm.n_rounds = as_int();
    else if (key == "gbm.learning_rate") spec.gbm.learning_rate = as_double();
    else if (key == "gbm.max_depth") spec.gbm.max_depth = as_int();
    else if (key == "gbm.row_subsample") spec.gbm.row_subsample = as_double();
    else if (key == "gbm.min_samples_leaf") spec.gbm.min_samples_leaf = as_int();
    else if (key == "gbm.candidate_thresholds_per_feature") spec.gbm.candidate_thresholds_per_feature = as_int();
    else if (key == "logistic.l2_lambda") spec.logistic.l2_lambda = as_double();
    else if (key == "logistic.max_iterations") spec.logistic.max_iterations = as_int();
    else if (key == "logistic.step_size") spec.logistic.step_size = as_double();
    else if (key == "logistic.convergence_tol") spec.logistic.convergence_tol = as_double();
    else throw Error(ErrorKind::config, "unknown learner key '" + std::string(key) + "'");
}

std::vector<std::pair<std::string, std::string>> spec_fields(const LearnerSpec& spec) {
    auto i = [](int v) { return std::to_string(v); };
    return {
        {"kind", std::string(to_string(spec.kind))},
        {"tree.max_depth", i(spec.tree.max_depth)},
        {"tree.min_samples_leaf", i(spec.tree.min_samples_leaf)},
        {"tree.candidate_thresholds_per_feature", i(spec.tree.candidate_thresholds_per_feature)},
        {"gbm.n_rounds", i(spec.gbm.n_rounds)},
        {"gbm.learning_rate", format_double(spec.gbm.learning_rate)},
        {"gbm.max_depth", i(spec.gbm.max_depth)},
        {"gbm.row_subsample", format_double(spec.gbm.row_subsample)},
        {"gbm.min_samples_leaf", i(spec.gbm.min_samples_leaf)},
        {"gbm.candidate_thresholds_per_feature", i(spec.gbm.candidate_thresholds_per_feature)},
        {"logistic.l2_lambda", format_double(spec.logistic.l2_lambda)},
        {"logistic.max_iterations", i(spec.logistic.max_iterations)},
        {"logistic.step_size", format_double(spec.logistic.step_size)},
        {"logistic.convergence_tol", format_double(spec.logistic.convergence_tol)},
    };
}

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

double parse_double_strict(std::string_view text) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        throw Error(ErrorKind::parse, "expected a number, got '" + std::string(text) + "'");
    }
    return v;
}

// --- bundle ---------------------------------------------------------------------------

std::string_view ModelBundle::method_name() const {
    switch (model.index()) {
        case 0: return "gbm";
        case 1: return "bagging";
        case 2: return "stacking";
        default: return "bagstacking";
    }
}

ProbabilityMatrix ModelBundle::predict(const Matrix& x, const EnsembleOptions& options) const {
    if (x.cols() != column_names.size()) {
        throw Error(ErrorKind::shape, "model expects " + std::to_string(column_names.size()) + " features, got " +
                                          std::to_string(x.cols()));
    }
    return std::visit(
        [&](const auto& m) -> ProbabilityMatrix {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, TrainedModel>) return predict_proba(m, x);
            else if constexpr (std::is_same_v<T, BaggingModel>) return predict_bagging(m, x, options);
            else if constexpr (std::is_same_v<T, StackingModel>) return predict_stacking(m, x, options);
            else return predict_bagstacking(m, x, options);
        },
        model);
}

void write_model(std::ostream& out, const ModelBundle& bundle) {
    out << kMagic << '\n';
    out << "features windows=";
    for (std::size_t i = 0; i < bundle.features.window_seconds.size(); ++i) {
        out << (i ? "," : "") << format_double(bundle.features.window_seconds[i]);
    }
    out << " statistics=";
    for (std::size_t i = 0; i < bundle.features.statistics.size(); ++i) {
        out << (i ? "," : "") << to_string(bundle.features.statistics[i]);
    }
    out << '\n' << "columns " << bundle.column_names.size() << '\n';
    for (const auto& c : bundle.column_names) out << c << '\n';
    out << "ensemble " << bundle.method_name() << '\n';

    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, TrainedModel>) {
                write_trained(out, m);
            } else if constexpr (std::is_same_v<T, BaggingModel>) {
                write_plan(out, m.plan);
                out << "members " << m.members.size() << '\n';
                for (const auto& member : m.members) write_trained(out, member);
            } else if constexpr (std::is_same_v<T, StackingModel>) {
                out << "folds " << m.folds << " seed " << m.seed << '\n';
                out << "bases " << m.base_models.size() << '\n';
                for (const auto& b : m.base_models) write_trained(out, b);
                out << "meta\n";
                write_trained(out, m.meta_model);
            } else {
                out << "mode " << to_string(m.mode) << '\n';
                write_plan(out, m.plan);
                out << "members " << m.base_models.size() << '\n';
                for (const auto& b : m.base_models) write_trained(out, b);
                out << "meta\n";
                write_trained(out, m.meta_model);
            }
        },
        bundle.model);
    out << "end bagstack-model\n";
}

ModelBundle read_model(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorKind::empty_input, "empty model file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kMagic) throw Error(ErrorKind::schema, "not a bagstack-model v1 file (first line '" + line + "')");

    Tokens tok(in);
    ModelBundle bundle;
    tok.expect("features");
    for (int i = 0; i < 2; ++i) {
        const auto t = tok.next();
        const auto eq = t.find('=');
        const auto key = std::string_view(t).substr(0, eq);
        const auto value = eq == std::string::npos ? std::string_view{} : std::string_view(t).substr(eq + 1);
        if (key == "windows") {
            bundle.features.window_seconds.clear();
            for (auto w : split_list(value)) bundle.features.window_seconds.push_back(parse_double_strict(w));
        } else if (key == "statistics") {
            bundle.features.statistics.clear();
            for (auto s : split_list(value)) bundle.features.statistics.push_back(parse_statistic(s));
        } else {
            throw Error(ErrorKind::parse, "unknown features token '" + t + "'");
        }
    }
    bundle.features.check();
    tok.expect("columns");
    bundle.column_names.resize(tok.count());
    for (auto& c : bundle.column_names) c = tok.next();

    tok.expect("ensemble");
    const auto method = tok.next();
    if (method == "gbm") {
        bundle.model = read_trained(tok);
    } else if (method == "bagging") {
        BaggingModel m;
        m.plan = read_plan(tok);
        m.members = read_members(tok, "members");
        bundle.model = std::move(m);
    } else if (method == "stacking") {
        StackingModel m;
        tok.expect("folds");
        m.folds = tok.integer<int>();
        tok.expect("seed");
        m.seed = tok.integer<std::uint64_t>();
        m.base_models = read_members(tok, "bases");
        tok.expect("meta");
        m.meta_model = read_trained(tok);
        bundle.model = std::move(m);
    } else if (method == "bagstacking") {
        BagStackingModel m;
        tok.expect("mode");
        m.mode = parse_meta_mode(tok.next());
        m.plan = read_plan(tok);
        m.base_models = read_members(tok, "members");
        tok.expect("meta");
        m.meta_model = read_trained(tok);
        bundle.model = std::move(m);
    } else {
        throw Error(ErrorKind::parse, "unknown ensemble '" + method + "'");
    }
    tok.expect("end");
    tok.expect("bagstack-model");
    return bundle;
}

void save_model(const std::string& path, const ModelBundle& bundle) {
    std::ostringstream buf;
    write_model(buf, bundle);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::io, "cannot write " + path);
    out << buf.str();
    if (!out) throw Error(ErrorKind::io, "failed writing " + path);
}

ModelBundle load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot open " + path);
    return read_model(in);
}

}  // namespace bagstack
