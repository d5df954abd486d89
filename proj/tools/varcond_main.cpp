// varcond: derive Euler-Lagrange equations, assemble the jet-space Hessian
// block matrix A, and test second-order extremum conditions for a candidate
// extremal described in a .vp problem file.

#include "varcond/varcond.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitParse = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitNotCritical = 4;

struct Options {
    std::string subcommand;
    std::string path;
    bool json = false;
    bool require_critical = false;
    std::optional<long long> seed;
    std::optional<int> trials;
    std::optional<std::vector<int>> grid;
};

void print_usage(std::ostream& os) {
    os << R"(usage: varcond <subcommand> FILE [options]

subcommands:
  euler-lagrange    print the Euler-Lagrange residual expressions
  hessian           print the block structure and entries of the matrix A
  classify          run the full second-order classification
  second-variation  run the finite-difference second-variation oracle

options:
  --json               emit JSON instead of text
  --seed N             override the random seed from [numerics]
  --trials N           oracle trial count (default 8); with `classify`,
                       passing --trials also runs the oracle
  --grid g1,...,gn     override the per-axis sample grid
  --require-critical   with `classify`, exit 4 if the candidate is not critical
  -h, --help           show this help

exit codes: 0 ok, 1 usage error, 2 parse error, 3 numeric/domain error,
4 candidate not critical (with --require-critical).
The environment variable VARCOND_THREADS caps the worker count.
)";
}

bool parse_int_arg(const std::string& text, long long& out) {
    auto res = std::from_chars(text.data(), text.data() + text.size(), out);
    return res.ec == std::errc{} && res.ptr == text.data() + text.size();
}

bool parse_grid_arg(const std::string& text, std::vector<int>& out) {
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        long long v = 0;
        if (!parse_int_arg(part, v) || v < 1 || v > 4096) return false;
        out.push_back(static_cast<int>(v));
    }
    return !out.empty();
}

int parse_args(int argc, char** argv, Options& opts) {
    std::vector<std::string> args(argv + 1, argv + argc);
    if (args.empty()) {
        print_usage(std::cerr);
        return kExitUsage;
    }
    if (args[0] == "-h" || args[0] == "--help") {
        print_usage(std::cout);
        return -1; // handled, exit 0
    }
    opts.subcommand = args[0];
    if (opts.subcommand != "euler-lagrange" && opts.subcommand != "hessian" &&
        opts.subcommand != "classify" && opts.subcommand != "second-variation") {
        std::cerr << "varcond: unknown subcommand '" << opts.subcommand << "'\n";
        print_usage(std::cerr);
        return kExitUsage;
    }
    for (std::size_t i = 1; i < args.size(); ++i) {
        const std::string& a = args[i];
        auto next = [&](const char* what) -> const std::string* {
            if (i + 1 >= args.size()) {
                std::cerr << "varcond: " << what << " requires a value\n";
                return nullptr;
            }
            return &args[++i];
        };
        if (a == "--json") {
            opts.json = true;
        } else if (a == "--require-critical") {
            opts.require_critical = true;
        } else if (a == "--seed") {
            const std::string* v = next("--seed");
            long long seed = 0;
            if (!v || !parse_int_arg(*v, seed)) return kExitUsage;
            opts.seed = seed;
        } else if (a == "--trials") {
            const std::string* v = next("--trials");
            long long trials = 0;
            if (!v || !parse_int_arg(*v, trials) || trials < 1 || trials > 10000) {
                std::cerr << "varcond: --trials needs an integer in 1..10000\n";
                return kExitUsage;
            }
            opts.trials = static_cast<int>(trials);
        } else if (a == "--grid") {
            const std::string* v = next("--grid");
            std::vector<int> grid;
            if (!v || !parse_grid_arg(*v, grid)) {
                std::cerr << "varcond: --grid needs comma-separated counts in 1..4096\n";
                return kExitUsage;
            }
            opts.grid = std::move(grid);
        } else if (a == "-h" || a == "--help") {
            print_usage(std::cout);
            return -1;
        } else if (!a.empty() && a[0] == '-') {
            std::cerr << "varcond: unknown option '" << a << "'\n";
            return kExitUsage;
        } else if (opts.path.empty()) {
            opts.path = a;
        } else {
            std::cerr << "varcond: unexpected extra argument '" << a << "'\n";
            return kExitUsage;
        }
    }
    if (opts.path.empty()) {
        std::cerr << "varcond: missing problem file\n";
        return kExitUsage;
    }
    return kExitOk;
}

std::string json_string_list(const std::vector<std::string>& values) {
    std::string out = "[";
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ", ";
        out += varcond::detail::json_string(values[i]);
    }
    return out + "]";
}

int run_euler_lagrange(const varcond::Problem& problem, const Options& opts) {
    const varcond::EulerLagrangeSystem sys =
        varcond::euler_lagrange_system(problem.lagrangian, problem.spec);
    if (opts.json) {
        std::vector<std::string> eqs;
        for (const varcond::Expr& e : sys.equations) eqs.push_back(varcond::to_string(e));
        std::cout << "{\n  \"equations\": " << json_string_list(eqs)
                  << ",\n  \"max_order\": " << sys.max_order << "\n}\n";
    } else {
        for (std::size_t j = 0; j < sys.equations.size(); ++j)
            std::cout << "delta L / delta " << problem.dependent_names[j] << " = "
                      << varcond::to_string(sys.equations[j]) << "\n";
        std::cout << "max derivative order: " << sys.max_order << "\n";
    }
    return kExitOk;
}

int run_hessian(const varcond::Problem& problem, const Options& opts) {
    const varcond::HessianMatrix a =
        varcond::build_hessian(problem.lagrangian, problem.spec);
    const varcond::JetSpec& spec = a.spec();
    const int dim = a.dim();
    const int zeros = a.structural_zeros();

    if (opts.json) {
        std::string out = "{\n  \"dim\": " + std::to_string(dim);
        out += ",\n  \"blocks\": [";
        bool first = true;
        for (int j = 1; j <= spec.m(); ++j)
            for (int jp = 1; jp <= spec.m(); ++jp)
                for (int k = 0; k <= spec.s(); ++k)
                    for (int kp = 0; kp <= spec.s(); ++kp) {
                        const auto [rows, cols] = a.block_shape(k, kp);
                        out += first ? "\n    " : ",\n    ";
                        first = false;
                        out += "{\"j\": " + std::to_string(j) + ", \"jp\": " +
                               std::to_string(jp) + ", \"k\": " + std::to_string(k) +
                               ", \"kp\": " + std::to_string(kp) + ", \"rows\": " +
                               std::to_string(rows) + ", \"cols\": " + std::to_string(cols) +
                               "}";
                    }
        out += "\n  ],\n  \"entries\": [";
        for (int r = 0; r < dim; ++r) {
            out += r ? ",\n    [" : "\n    [";
            for (int c = 0; c < dim; ++c) {
                if (c) out += ", ";
                out += varcond::detail::json_string(varcond::to_string(a.entry(r, c)));
            }
            out += "]";
        }
        out += "\n  ],\n  \"structural_zeros\": " + std::to_string(zeros) + "\n}\n";
        std::cout << out;
    } else {
        std::cout << "matrix A: " << dim << " x " << dim << " ("
                  << spec.m() << " x " << spec.m() << " blocks of ("
                  << spec.s() + 1 << " x " << spec.s() + 1 << ") order blocks)\n";
        std::cout << "order block shapes (p_k x p_k'):\n";
        for (int k = 0; k <= spec.s(); ++k) {
            std::cout << " ";
            for (int kp = 0; kp <= spec.s(); ++kp) {
                const auto [rows, cols] = a.block_shape(k, kp);
                std::cout << " " << rows << "x" << cols;
            }
            std::cout << "\n";
        }
        std::cout << "nonzero entries:\n";
        for (int r = 0; r < dim; ++r)
            for (int c = 0; c < dim; ++c)
                if (!a.entry(r, c).is_constant(0.0))
                    std::cout << "  d2L / d" << varcond::coordinate_name(spec.unrank(r))
                              << " d" << varcond::coordinate_name(spec.unrank(c)) << " = "
                              << varcond::to_string(a.entry(r, c)) << "\n";
        std::cout << "structural zeros: " << zeros << " of " << dim * dim << " entries\n";
    }
    return kExitOk;
}

int run_classify(const varcond::Problem& problem, const Options& opts) {
    const bool with_oracle = opts.trials.has_value();
    const varcond::ClassificationReport report =
        varcond::classify(problem, with_oracle, opts.trials.value_or(8));
    std::cout << varcond::emit_report(report, opts.json);
    if (opts.require_critical && !report.critical) return kExitNotCritical;
    return kExitOk;
}

int run_second_variation(const varcond::Problem& problem, const Options& opts) {
    const int trials = opts.trials.value_or(8);
    const varcond::OracleRecord record = varcond::second_variation_oracle(problem, trials);
    if (opts.json) {
        std::string out = "{\n  \"trials\": [";
        for (std::size_t t = 0; t < record.trials.size(); ++t) {
            const varcond::OracleTrial& trial = record.trials[t];
            out += t ? ",\n    " : "\n    ";
            out += "{\"fd_second\": " + varcond::detail::json_number(trial.fd_second);
            out += ", \"quadratic_form\": " +
                   varcond::detail::json_number(trial.quadratic_form);
            out += ", \"rel_gap\": " + varcond::detail::json_number(trial.rel_gap);
            out += ", \"first_variation\": " +
                   varcond::detail::json_number(trial.first_variation) + "}";
        }
        out += "\n  ],\n  \"rel_gap\": " + varcond::detail::json_number(record.rel_gap);
        out += ",\n  \"fd_second\": " + varcond::detail::json_number(record.fd_second);
        out += ",\n  \"quadratic_form\": " +
               varcond::detail::json_number(record.quadratic_form);
        out += ",\n  \"first_variation_max\": " +
               varcond::detail::json_number(record.first_variation_max) + "\n}\n";
        std::cout << out;
    } else {
        std::cout << "second-variation oracle: " << trials << " trials, seed "
                  << problem.numerics.seed << ", h = 0.0001\n";
        for (std::size_t t = 0; t < record.trials.size(); ++t) {
            const varcond::OracleTrial& trial = record.trials[t];
            std::cout << "  trial " << t << ": FD = "
                      << varcond::detail::format_double(trial.fd_second) << "  QF = "
                      << varcond::detail::format_double(trial.quadratic_form)
                      << "  rel gap = " << varcond::detail::format_double(trial.rel_gap)
                      << "  first variation = "
                      << varcond::detail::format_double(trial.first_variation) << "\n";
        }
        std::cout << "worst rel gap = " << varcond::detail::format_double(record.rel_gap)
                  << "\nmax |first variation| = "
                  << varcond::detail::format_double(record.first_variation_max) << "\n";
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    Options opts;
    const int arg_status = parse_args(argc, argv, opts);
    if (arg_status == -1) return kExitOk; // --help
    if (arg_status != kExitOk) return arg_status;

    std::ifstream in(opts.path, std::ios::binary);
    if (!in) {
        std::cerr << opts.path << ": error: cannot open file\n";
        return kExitParse;
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();

    try {
        varcond::Problem problem = varcond::parse_problem(text);
        if (opts.seed) problem.numerics.seed = static_cast<std::uint64_t>(*opts.seed);
        if (opts.grid) {
            if (opts.grid->size() != 1 &&
                opts.grid->size() != static_cast<std::size_t>(problem.spec.n())) {
                std::cerr << "varcond: --grid needs 1 or " << problem.spec.n()
                          << " values for this problem\n";
                return kExitUsage;
            }
            if (opts.grid->size() == 1)
                problem.numerics.grid.assign(static_cast<std::size_t>(problem.spec.n()),
                                             (*opts.grid)[0]);
            else
                problem.numerics.grid = *opts.grid;
        }

        if (opts.subcommand == "euler-lagrange") return run_euler_lagrange(problem, opts);
        if (opts.subcommand == "hessian") return run_hessian(problem, opts);
        if (opts.subcommand == "classify") return run_classify(problem, opts);
        return run_second_variation(problem, opts);
    } catch (const varcond::ParseError& e) {
        const auto [line, col] = varcond::line_col(text, e.offset());
        std::cerr << opts.path << ":" << line << ":" << col << ": error: " << e.what()
                  << "\n";
        return kExitParse;
    } catch (const varcond::NumericError& e) {
        std::cerr << opts.path << ": numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const varcond::Error& e) {
        std::cerr << opts.path << ": error: " << e.what() << "\n";
        return kExitNumeric;
    }
}
