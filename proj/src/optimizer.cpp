#include "spdc/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include <fmt/format.h>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "spdc/quadrature.hpp"

namespace spdc
{
namespace
{

using Objective = std::function<double(std::span<const double>)>;

double gsl_trampoline(const gsl_vector* v, void* params)
{
    const auto& f = *static_cast<const Objective*>(params);
    const double value = f(std::span<const double>(v->data, v->size));
    // The simplex treats NaN as worse than anything else.
    return std::isfinite(value) ? value : std::numeric_limits<double>::max();
}

constexpr double kGolden = 0.6180339887498949;

double waist_for(const OpticalConfig& cfg, double xi, double k)
{
    return waist_from_xi(cfg, BeamParameter{xi}, k);
}

// Largest-magnitude entry becomes +1; first index wins on ties.
std::vector<double> normalize_max(std::vector<double> c)
{
    std::size_t best = 0;
    for (std::size_t n = 1; n < c.size(); ++n)
        if (std::abs(c[n]) > std::abs(c[best]))
            best = n;
    const double scale = c[best];
    if (scale == 0.0)
        return c;
    for (double& v : c)
        v /= scale;
    return c;
}

}  // namespace

NelderMeadResult nelder_mead_minimize(const Objective& f, std::vector<double> x0,
                                      const NelderMeadOptions& opts)
{
    NelderMeadResult out;
    if (x0.empty()) {
        out.x = std::move(x0);
        out.value = f(out.x);
        out.converged = true;
        return out;
    }
    const std::size_t n = x0.size();
    gsl_multimin_function fn;
    fn.n = n;
    fn.f = &gsl_trampoline;
    fn.params = const_cast<Objective*>(&f);

    gsl_vector* x = gsl_vector_alloc(n);
    gsl_vector* step = gsl_vector_alloc(n);
    for (std::size_t i = 0; i < n; ++i) {
        gsl_vector_set(x, i, x0[i]);
        gsl_vector_set(step, i, opts.initial_step);
    }
    gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n);
    gsl_multimin_fminimizer_set(s, &fn, x, step);

    std::size_t iter = 0;
    int status = GSL_CONTINUE;
    while (status == GSL_CONTINUE && iter < opts.max_iter) {
        ++iter;
        if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS)
            break;
        status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), opts.size_tol);
    }
    out.x.assign(s->x->data, s->x->data + n);
    out.value = s->fval;
    out.iterations = iter;
    out.converged = status == GSL_SUCCESS;
    gsl_multimin_fminimizer_free(s);
    gsl_vector_free(step);
    gsl_vector_free(x);
    return out;
}

LineMaximum maximize_log_bracket(const std::function<double(double)>& f, double lo, double hi,
                                 std::size_t grid, double rel_tol)
{
    if (!(lo > 0.0) || !(hi > lo) || grid < 3)
        throw ConfigError("log bracket needs 0 < lo < hi and at least 3 samples");
    const double a0 = std::log(lo);
    const double step = (std::log(hi) - a0) / static_cast<double>(grid - 1);
    std::vector<double> values(grid);
    std::size_t best = 0;
    for (std::size_t k = 0; k < grid; ++k) {
        values[k] = f(std::exp(a0 + step * static_cast<double>(k)));
        if (values[k] > values[best])
            best = k;
    }
    double a = a0 + step * static_cast<double>(best == 0 ? 0 : best - 1);
    double b = a0 + step * static_cast<double>(std::min(best + 1, grid - 1));

    LineMaximum out{std::exp(a0 + step * static_cast<double>(best)), values[best], false};
    double c = b - kGolden * (b - a);
    double d = a + kGolden * (b - a);
    double fc = f(std::exp(c));
    double fd = f(std::exp(d));
    for (int it = 0; it < 200 && (b - a) > rel_tol; ++it) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kGolden * (b - a);
            fc = f(std::exp(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kGolden * (b - a);
            fd = f(std::exp(d));
        }
    }
    out.converged = (b - a) <= rel_tol;
    const double xc = fc >= fd ? c : d;
    const double fx = std::max(fc, fd);
    if (fx > out.value) {
        out.x = std::exp(xc);
        out.value = fx;
    }
    return out;
}

Chi2Profile CrystalOptResult::profile() const
{
    return Chi2Profile::cosine(length_um, coefficients, sigma_um);
}

std::vector<double> unit_start(std::size_t terms)
{
    std::vector<double> c(terms, 0.0);
    c[terms > 1 ? 1 : 0] = 1.0;
    return c;
}

std::vector<double> gaussian_matched_start(double length_um, std::size_t terms, double sigma_um)
{
    const double width = length_um / 4.0;
    const GaussRule rule = gauss_legendre(256, -0.5 * length_um, 0.5 * length_um);
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(terms),
                                                 static_cast<Eigen::Index>(terms));
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(terms));
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        const double z = rule.nodes[k];
        const double g = std::exp(-z * z / (width * width));
        for (std::size_t a = 0; a < terms; ++a) {
            const double fa = std::cos(static_cast<double>(a) * z / sigma_um);
            rhs(static_cast<Eigen::Index>(a)) += rule.weights[k] * fa * g;
            for (std::size_t b = 0; b < terms; ++b)
                gram(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) +=
                    rule.weights[k] * fa * std::cos(static_cast<double>(b) * z / sigma_um);
        }
    }
    const Eigen::VectorXd c = gram.ldlt().solve(rhs);
    return normalize_max(std::vector<double>(c.data(), c.data() + c.size()));
}

std::vector<double> random_start(std::size_t terms, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> c(terms);
    for (double& v : c)
        v = u(rng);
    return c;
}

CrystalOptResult optimize_crystal(const OpticalConfig& cfg, int order, double xi0,
                                  const CrystalOptOptions& opts)
{
    if (order < 0 || order > 16)
        throw ConfigError(fmt::format("series order must lie in [0, 16] (got {})", order));
    if (!(xi0 > 0.0))
        throw ConfigError("initial beam parameter must be positive");
    if (!(opts.sigma_over_length > 0.0))
        throw ConfigError("sigma_over_length must be positive");

    const std::size_t terms = static_cast<std::size_t>(order) + 1;
    const double length = cfg.length_um;
    const double sigma = opts.sigma_over_length * length;

    CrystalOptResult out;
    out.sigma_um = sigma;
    out.length_um = length;

    const auto purity_at = [&](const std::vector<double>& c, double xi) {
        const Chi2Profile profile = Chi2Profile::cosine(length, c, sigma);
        return purity_z_kernel(cfg, waist_for(cfg, xi, cfg.k_p), profile, opts.search);
    };

    const std::vector<std::vector<double>> starts{unit_start(terms),
                                                  gaussian_matched_start(length, terms, sigma),
                                                  random_start(terms, opts.seed)};
    std::vector<double> c = starts[0];
    double xi = xi0;
    double previous = -1.0;

    for (int outer = 0; outer < opts.max_outer; ++outer) {
        // (i) coefficients at fixed xi. The current vector competes with the
        // documented starts; earlier candidates win ties.
        if (terms > 1) {
            const GaussianPumpKernel kernel = GaussianPumpKernel::cosine(
                cfg, waist_for(cfg, xi, cfg.k_p), terms, sigma, opts.search);
            const Objective objective = [&](std::span<const double> x) {
                const double n = kernel.norm(x);
                return n > 0.0 ? -kernel.purity(x) : 0.0;
            };
            std::vector<std::vector<double>> candidates;
            if (outer > 0)
                candidates.push_back(c);
            candidates.insert(candidates.end(), starts.begin(), starts.end());
            double best_value = std::numeric_limits<double>::infinity();
            for (const auto& start : candidates) {
                const NelderMeadResult r = nelder_mead_minimize(objective, start, opts.simplex);
                if (r.value < best_value) {
                    best_value = r.value;
                    c = r.x;
                }
            }
            c = normalize_max(c);
        } else {
            c = {1.0};
        }

        // (ii-iii) beam parameter at fixed coefficients; the current value is
        // kept unless the search strictly improves on it.
        const double current = purity_at(c, xi);
        const LineMaximum line =
            maximize_log_bracket([&](double x) { return purity_at(c, x); }, opts.xi_min,
                                 opts.xi_max, opts.xi_grid, opts.xi_rel_tol);
        double purity = current;
        if (line.value > current) {
            xi = line.x;
            purity = line.value;
        }
        out.purity_trace.push_back(purity);
        out.xi_trace.push_back(xi);
        out.outer_iterations = outer + 1;

        // (iv) stop once the purity has settled.
        if (std::abs(purity - previous) < opts.purity_tol) {
            out.converged = true;
            break;
        }
        previous = purity;
    }

    out.coefficients = c;
    out.xi_star = xi;
    out.purity = purity_z_kernel(cfg, waist_for(cfg, xi, cfg.k_p), out.profile(), opts.verify);
    return out;
}

std::vector<std::pair<int, int>> pump_mode_range(int p_max, int l_max)
{
    if (p_max < 0 || l_max < 0)
        throw ConfigError("pump mode range needs p_max >= 0 and l_max >= 0");
    std::vector<std::pair<int, int>> modes{{0, 0}};
    for (int p = 0; p <= p_max; ++p)
        for (int l = -l_max; l <= l_max; ++l)
            if (p != 0 || l != 0)
                modes.emplace_back(p, l);
    return modes;
}

double pump_objective(const ModeTensors& tensors, const Eigen::VectorXcd& a)
{
    const Eigen::MatrixXcd c = tensors.raw_matrix(a);
    const double n = c.squaredNorm();
    return purity_lower_bound(c, n);
}

PumpObjective::PumpObjective(const ModeTensors& tensors)
    : side_(tensors.bounds.H + 1), blocks_(2 * tensors.bounds.U + 1), by_row_(blocks_)
{
    for (Eigen::Index r = 0; r < blocks_; ++r) {
        for (Eigen::Index c = 0; c < blocks_; ++c) {
            Cell cell{r, c, {}};
            for (std::size_t m = 0; m < tensors.blocks.size(); ++m) {
                const Eigen::MatrixXcd sub =
                    tensors.blocks[m].block(r * side_, c * side_, side_, side_);
                if (!sub.isZero(0.0))
                    cell.terms.emplace_back(static_cast<Eigen::Index>(m), sub);
            }
            if (!cell.terms.empty()) {
                by_row_[static_cast<std::size_t>(r)].push_back(cells_.size());
                cells_.push_back(std::move(cell));
            }
        }
    }
}

double PumpObjective::operator()(const Eigen::VectorXcd& a) const
{
    std::vector<Eigen::MatrixXcd> c(cells_.size());
    double norm = 0.0;
    for (std::size_t k = 0; k < cells_.size(); ++k) {
        c[k] = Eigen::MatrixXcd::Zero(side_, side_);
        for (const auto& [m, sub] : cells_[k].terms)
            c[k] += a(m) * sub;
        norm += c[k].squaredNorm();
    }
    // G = C^H C in blocks; only idler pairs sharing a signal block are nonzero.
    std::vector<Eigen::MatrixXcd> g(static_cast<std::size_t>(blocks_ * blocks_));
    for (const auto& row : by_row_) {
        for (std::size_t x : row) {
            for (std::size_t y : row) {
                if (cells_[y].col < cells_[x].col)
                    continue;
                auto& gb = g[static_cast<std::size_t>(cells_[x].col * blocks_ + cells_[y].col)];
                if (gb.size() == 0)
                    gb = Eigen::MatrixXcd::Zero(side_, side_);
                gb.noalias() += c[x].adjoint() * c[y];
            }
        }
    }
    double sum = 0.0;
    for (Eigen::Index i = 0; i < blocks_; ++i)
        for (Eigen::Index j = i; j < blocks_; ++j) {
            const auto& gb = g[static_cast<std::size_t>(i * blocks_ + j)];
            if (gb.size() != 0)
                sum += (i == j ? 1.0 : 2.0) * gb.squaredNorm();
        }
    return sum / (norm * norm);
}

Eigen::VectorXcd pump_coefficients_from_params(std::span<const double> x)
{
    if (x.size() % 2 != 0)
        throw ConfigError("pump parameter vector must have even length");
    const Eigen::Index n = static_cast<Eigen::Index>(x.size() / 2) + 1;
    Eigen::VectorXcd a(n);
    a(0) = 1.0;
    for (Eigen::Index k = 1; k < n; ++k)
        a(k) = cplx(x[static_cast<std::size_t>(2 * k - 2)], x[static_cast<std::size_t>(2 * k - 1)]);
    return a / a.norm();
}

PumpOptResult optimize_pump(const ModeTensors& tensors, const PumpOptOptions& opts)
{
    if (tensors.pump_modes.empty() || tensors.pump_modes.front() != std::pair{0, 0})
        throw ConfigError("pump optimization needs the Gaussian mode first in the mode list");
    const std::size_t modes = tensors.pump_modes.size();

    std::size_t evaluations = 0;
    const PumpObjective purity(tensors);
    const Objective objective = [&](std::span<const double> x) {
        ++evaluations;
        return -purity(pump_coefficients_from_params(x));
    };
    NelderMeadResult r =
        nelder_mead_minimize(objective, std::vector<double>(2 * (modes - 1), 0.0), opts.simplex);
    for (int k = 1; k < opts.restarts; ++k) {
        NelderMeadResult next = nelder_mead_minimize(objective, r.x, opts.simplex);
        const double gain = r.value - next.value;
        if (gain > 0.0)
            r = std::move(next);
        if (!(gain >= opts.restart_gain))
            break;
    }

    Eigen::VectorXcd gaussian = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(modes));
    gaussian(0) = 1.0;
    const MetricsReport base = report_from_tensors(tensors, gaussian, opts.min_capture);

    Eigen::VectorXcd a = pump_coefficients_from_params(r.x);
    MetricsReport best = report_from_tensors(tensors, a, opts.min_capture);
    // Ascent starts at the Gaussian pump, so never report anything worse.
    if (best.purity < base.purity) {
        a = gaussian;
        best = base;
    }

    PumpOptResult out;
    out.pump.waist_um = tensors.w_p;
    for (std::size_t m = 0; m < modes; ++m) {
        const cplx v = a(static_cast<Eigen::Index>(m));
        if (v != cplx{})
            out.pump.modes.push_back({tensors.pump_modes[m].first, tensors.pump_modes[m].second, v});
    }
    out.purity = best.purity;
    out.purity_gaussian = base.purity;
    out.purity_lower_bound = purity_lower_bound(tensors.raw_matrix(a), tensors.norm(a));
    out.r2_smf = best.r2_smf;
    out.heralding = best.heralding;
    out.signal_singles = best.signal_singles;
    out.captured_norm = best.captured_norm;
    out.evaluations = evaluations;
    out.converged = r.converged;
    return out;
}

CollectionResult optimize_collection(const OpticalConfig& cfg, const PumpSpec& pump,
                                     const Chi2Profile& profile, bool symmetric,
                                     const MetricsOptions& opts)
{
    const auto r2 = [&](double xi_s, double xi_i) {
        return pair_collection_smf(cfg, pump, profile, waist_for(cfg, xi_s, cfg.k_s),
                                   waist_for(cfg, xi_i, cfg.k_i), opts);
    };
    const LineMaximum line =
        maximize_log_bracket([&](double xi) { return r2(xi, xi); }, 0.1, 10.0, 21, 1e-5);
    CollectionResult out{waist_for(cfg, line.x, cfg.k_s), waist_for(cfg, line.x, cfg.k_i),
                         line.value};
    if (symmetric)
        return out;

    const Objective objective = [&](std::span<const double> x) {
        return -r2(std::exp(x[0]), std::exp(x[1]));
    };
    const NelderMeadResult r = nelder_mead_minimize(
        objective, {std::log(line.x), std::log(line.x)}, NelderMeadOptions{0.05, 1e-7, 2000});
    if (-r.value > out.r2_smf) {
        out.w_s = waist_for(cfg, std::exp(r.x[0]), cfg.k_s);
        out.w_i = waist_for(cfg, std::exp(r.x[1]), cfg.k_i);
        out.r2_smf = -r.value;
    }
    return out;
}

std::size_t ScanTable::points() const
{
    std::size_t n = 1;
    for (const auto& axis : axes)
        n *= axis.size();
    return n;
}

void ScanTable::validate() const
{
    if (axis_names.size() != axes.size() || metric_names.size() != values.size())
        throw ConfigError("scan table names do not match its data");
    for (const auto& v : values)
        if (v.size() != points())
            throw ConfigError("scan table values do not match the grid dimensions");
}

ScanTable scan_waist_length(const OpticalConfig& cfg, const Chi2Profile& profile,
                            const std::vector<double>& waists_um,
                            const std::vector<double>& lengths_um, const ZKernelOptions& opts)
{
    ScanTable t{"waist-length", {"w_p_um", "length_um"}, {waists_um, lengths_um}, {"purity"}, {}};
    t.values.assign(1, std::vector<double>(t.points()));
    std::size_t k = 0;
    for (double w : waists_um) {
        for (double l : lengths_um) {
            const OpticalConfig c = with_length(cfg, l);
            t.values[0][k++] = purity_z_kernel(c, w, profile.rescaled(l), opts);
        }
    }
    return t;
}

ScanTable scan_xi(const OpticalConfig& cfg, const Chi2Profile& profile,
                  const std::vector<double>& xi_p, const ZKernelOptions& opts)
{
    ScanTable t{"xi", {"xi_p"}, {xi_p}, {"purity"}, {}};
    t.values.assign(1, std::vector<double>(t.points()));
    for (std::size_t k = 0; k < xi_p.size(); ++k)
        t.values[0][k] = purity_z_kernel(cfg, waist_for(cfg, xi_p[k], cfg.k_p), profile, opts);
    return t;
}

ScanTable scan_collection(const OpticalConfig& cfg, const Chi2Profile& profile,
                          const std::vector<double>& xi_p, const std::vector<double>& xi_s,
                          std::size_t nodes)
{
    ScanTable t{"collection", {"xi_p", "xi_s"}, {xi_p, xi_s}, {"r2_smf"}, {}};
    t.values.assign(1, std::vector<double>(t.points()));
    std::size_t k = 0;
    for (double xp : xi_p) {
        const double w_p = waist_for(cfg, xp, cfg.k_p);
        const double n2 = state_norm_gaussian(cfg, w_p, profile, nodes);
        for (double xs : xi_s) {
            const cplx amp = collection_amplitude_gaussian(
                cfg, w_p, profile, waist_for(cfg, xs, cfg.k_s), waist_for(cfg, xs, cfg.k_i), nodes);
            t.values[0][k++] = std::norm(amp) / n2;
        }
    }
    return t;
}

ScanTable scan_series_order(const OpticalConfig& cfg, int max_order, double xi0,
                            const CrystalOptOptions& opts)
{
    if (max_order < 0 || max_order > 16)
        throw ConfigError("series order must lie in [0, 16]");
    ScanTable t{"series-order", {"order"}, {{}}, {"xi_star", "purity", "r2_smf"}, {}};
    t.values.assign(3, {});
    for (int n = 0; n <= max_order; ++n) {
        const CrystalOptResult r = optimize_crystal(cfg, n, xi0, opts);
        const PumpSpec pump = PumpSpec::gaussian(waist_for(cfg, r.xi_star, cfg.k_p));
        const CollectionResult col = optimize_collection(cfg, pump, r.profile(), true);
        t.axes[0].push_back(n);
        t.values[0].push_back(r.xi_star);
        t.values[1].push_back(r.purity);
        t.values[2].push_back(col.r2_smf);
    }
    return t;
}

void write_scan_csv(const ScanTable& table, std::ostream& out,
                    const std::vector<std::pair<std::string, std::string>>& meta)
{
    table.validate();
    out << "# kind=" << table.kind << '\n';
    out << "# metrics=" << table.metric_names.size() << '\n';
    for (const auto& [key, value] : meta)
        out << "# " << key << '=' << value << '\n';
    std::vector<std::string> header = table.axis_names;
    header.insert(header.end(), table.metric_names.begin(), table.metric_names.end());
    out << fmt::format("{}\n", fmt::join(header, ","));

    const std::size_t dims = table.axes.size();
    std::vector<std::size_t> idx(dims, 0);
    for (std::size_t k = 0; k < table.points(); ++k) {
        std::vector<std::string> row;
        for (std::size_t d = 0; d < dims; ++d)
            row.push_back(fmt::format("{:.17g}", table.axes[d][idx[d]]));
        for (const auto& v : table.values)
            row.push_back(fmt::format("{:.17g}", v[k]));
        out << fmt::format("{}\n", fmt::join(row, ","));
        for (std::size_t d = dims; d-- > 0;) {
            if (++idx[d] < table.axes[d].size())
                break;
            idx[d] = 0;
        }
    }
}

ScanTable read_scan_csv(std::istream& in)
{
    ScanTable t;
    std::string line;
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    std::size_t metric_count = 0;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        if (line.front() == '#') {
            const auto eq = line.find('=');
            if (eq != std::string::npos && line.compare(0, 7, "# kind=") == 0)
                t.kind = line.substr(eq + 1);
            else if (eq != std::string::npos && line.compare(0, 10, "# metrics=") == 0)
                metric_count = std::stoul(line.substr(eq + 1));
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');)
            cells.push_back(cell);
        if (header.empty()) {
            header = cells;
            continue;
        }
        if (cells.size() != header.size())
            throw ConfigError("scan CSV row width does not match its header");
        std::vector<double> row;
        for (const auto& c : cells)
            row.push_back(std::stod(c));
        rows.push_back(std::move(row));
    }
    if (header.empty())
        throw ConfigError("scan CSV has no header");
    if (metric_count == 0 || metric_count >= header.size())
        throw ConfigError("scan CSV lacks a valid '# metrics=' line");
    const std::size_t dims = header.size() - metric_count;
    t.axis_names.assign(header.begin(), header.begin() + static_cast<std::ptrdiff_t>(dims));
    t.metric_names.assign(header.begin() + static_cast<std::ptrdiff_t>(dims), header.end());
    t.axes.assign(dims, {});
    for (std::size_t d = 0; d < dims; ++d) {
        for (const auto& row : rows) {
            if (std::find(t.axes[d].begin(), t.axes[d].end(), row[d]) == t.axes[d].end())
                t.axes[d].push_back(row[d]);
        }
    }
    t.values.assign(metric_count, {});
    for (const auto& row : rows)
        for (std::size_t m = 0; m < metric_count; ++m)
            t.values[m].push_back(row[dims + m]);
    t.validate();
    return t;
}

nlohmann::json to_json(const CrystalOptResult& r)
{
    return {{"coefficients", r.coefficients},   {"sigma_um", r.sigma_um},
            {"length_um", r.length_um},         {"xi_star", r.xi_star},
            {"purity", r.purity},               {"purity_trace", r.purity_trace},
            {"xi_trace", r.xi_trace},           {"outer_iterations", r.outer_iterations},
            {"converged", r.converged}};
}

CrystalOptResult crystal_result_from_json(const nlohmann::json& j)
{
    CrystalOptResult r;
    r.coefficients = j.at("coefficients").get<std::vector<double>>();
    r.sigma_um = j.at("sigma_um").get<double>();
    r.length_um = j.at("length_um").get<double>();
    r.xi_star = j.at("xi_star").get<double>();
    r.purity = j.at("purity").get<double>();
    r.purity_trace = j.at("purity_trace").get<std::vector<double>>();
    r.xi_trace = j.at("xi_trace").get<std::vector<double>>();
    r.outer_iterations = j.at("outer_iterations").get<int>();
    r.converged = j.at("converged").get<bool>();
    return r;
}

nlohmann::json to_json(const PumpOptResult& r)
{
    return {{"pump", to_json(r.pump)},
            {"purity", r.purity},
            {"purity_gaussian", r.purity_gaussian},
            {"purity_lower_bound", r.purity_lower_bound},
            {"r2_smf", r.r2_smf},
            {"heralding", r.heralding},
            {"signal_singles", r.signal_singles},
            {"captured_norm", r.captured_norm},
            {"evaluations", r.evaluations},
            {"converged", r.converged}};
}

PumpOptResult pump_result_from_json(const nlohmann::json& j)
{
    PumpOptResult r;
    r.pump = pump_from_json(j.at("pump"));
    r.purity = j.at("purity").get<double>();
    r.purity_gaussian = j.at("purity_gaussian").get<double>();
    r.purity_lower_bound = j.at("purity_lower_bound").get<double>();
    r.r2_smf = j.at("r2_smf").get<double>();
    r.heralding = j.at("heralding").get<double>();
    r.signal_singles = j.at("signal_singles").get<double>();
    r.captured_norm = j.at("captured_norm").get<double>();
    r.evaluations = j.at("evaluations").get<std::size_t>();
    r.converged = j.at("converged").get<bool>();
    return r;
}

}  // namespace spdc
