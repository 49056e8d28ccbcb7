#include "locmix/potential.hpp"

#include "locmix/errors.hpp"
#include "locmix/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace locmix {

namespace {

constexpr std::size_t kDefaultChainBurnIn = 10'000;
constexpr double kStochasticTolerance = 1e-12;
constexpr std::uint64_t kPilotStream = 0xC0FFEEULL << 32;

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

class BitSource {
public:
    explicit BitSource(std::uint64_t seed) : rng_(seed) {}
    int next()
    {
        if (left_ == 0) {
            word_ = rng_.bits();
            left_ = 64;
        }
        const int bit = static_cast<int>(word_ & 1u);
        word_ >>= 1;
        --left_;
        return bit;
    }

private:
    Rng rng_;
    std::uint64_t word_ = 0;
    int left_ = 0;
};

bool strongly_connected(const std::vector<std::vector<double>>& p)
{
    const std::size_t n = p.size();
    auto reach_all = [&](bool forward) {
        std::vector<char> seen(n, 0);
        std::vector<std::size_t> todo{0};
        seen[0] = 1;
        while (!todo.empty()) {
            const std::size_t i = todo.back();
            todo.pop_back();
            for (std::size_t j = 0; j < n; ++j) {
                const double w = forward ? p[i][j] : p[j][i];
                if (w > 0.0 && !seen[j]) {
                    seen[j] = 1;
                    todo.push_back(j);
                }
            }
        }
        return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
    };
    return reach_all(true) && reach_all(false);
}

double iid_mean(const IidParams& p)
{
    return std::inner_product(p.values.begin(), p.values.end(), p.weights.begin(), 0.0);
}

std::vector<double> cumulative(const std::vector<double>& weights)
{
    std::vector<double> cum(weights.size());
    std::partial_sum(weights.begin(), weights.end(), cum.begin());
    cum.back() = 1.0;
    return cum;
}

std::size_t draw_index(const std::vector<double>& cum, double u)
{
    const auto it = std::upper_bound(cum.begin(), cum.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cum.begin()), cum.size() - 1);
}

double intermittent_step(double x, double z)
{
    x += std::pow(x, 1.0 + z);
    if (x >= 1.0)
        x -= 1.0;
    return x;
}

struct IidGen {
    Rng rng;
    std::vector<double> cum;
    std::vector<double> centered;
    double next() { return centered[draw_index(cum, rng.uniform())]; }
};

struct MarkovGen {
    Rng rng;
    std::vector<std::vector<double>> cum;
    std::vector<double> centered;
    std::size_t state = 0;
    double next()
    {
        const double v = centered[state];
        state = draw_index(cum[state], rng.uniform());
        return v;
    }
};

struct MovingAverageGen {
    BitSource bits;
    std::vector<double> powers;
    std::vector<double> window;  // sigma_n - 1/2 ... sigma_{n+K-1} - 1/2, ring
    std::size_t head = 0;
    double next()
    {
        const std::size_t k_max = powers.size();
        double v = 0.0;
        for (std::size_t k = 0; k < k_max; ++k)
            v += powers[k] * window[(head + k) % k_max];
        window[head] = bits.next() - 0.5;
        head = (head + 1) % k_max;
        return v;
    }
};

struct IntermittentGen {
    Rng rng;
    double z;
    double x;
    double mean;
    double next()
    {
        const double v = x - mean;
        x = intermittent_step(x, z);
        if (!(x > 0.0))
            x = rng.uniform();  // exact zero is a fixed point in floating point
        return v;
    }
};

struct CocycleGen {
    BitSource bits;
    double scale;
    int current;
    double next()
    {
        const int following = bits.next();
        const double v = scale * (following - current);
        current = following;
        return v;
    }
};

double intermittent_pilot_mean(const PotentialProcess& process, const IntermittentParams& p)
{
    Rng rng(derive_seed(process.seed, kPilotStream));
    double x = rng.uniform();
    for (std::size_t i = 0; i < process.effective_burn_in(); ++i)
        x = intermittent_step(x, p.z);
    long double sum = 0.0;
    for (std::size_t i = 0; i < p.pilot_length; ++i) {
        sum += x;
        x = intermittent_step(x, p.z);
        if (!(x > 0.0))
            x = rng.uniform();
    }
    return static_cast<double>(sum / static_cast<long double>(p.pilot_length));
}

using Generator = std::variant<IidGen, MarkovGen, MovingAverageGen, IntermittentGen, CocycleGen>;

}  // namespace

struct PotentialStream::State {
    Generator gen;
    double next()
    {
        return std::visit([](auto& g) { return g.next(); }, gen);
    }
};

std::string to_string(ProcessKind kind)
{
    switch (kind) {
    case ProcessKind::IID: return "iid";
    case ProcessKind::MarkovChain: return "markov";
    case ProcessKind::MovingAverageShift: return "moving_average";
    case ProcessKind::IntermittentMap: return "intermittent";
    case ProcessKind::Cocycle: return "cocycle";
    }
    return "unknown";
}

ProcessKind process_kind_from_string(const std::string& name)
{
    for (auto kind : {ProcessKind::IID, ProcessKind::MarkovChain, ProcessKind::MovingAverageShift,
                      ProcessKind::IntermittentMap, ProcessKind::Cocycle})
        if (to_string(kind) == name)
            return kind;
    throw ConfigError("unknown process kind '" + name + "'");
}

ProcessKind PotentialProcess::kind() const
{
    return static_cast<ProcessKind>(params.index());
}

std::size_t PotentialProcess::effective_burn_in() const
{
    if (burn_in)
        return *burn_in;
    switch (kind()) {
    case ProcessKind::MarkovChain:
    case ProcessKind::IntermittentMap: return kDefaultChainBurnIn;
    default: return 0;
    }
}

void PotentialProcess::validate() const
{
    std::visit(
        Overloaded{
            [](const IidParams& p) {
                if (p.values.empty() || p.values.size() != p.weights.size())
                    throw ConfigError("iid: values and weights must be non-empty and of equal length");
                double total = 0.0;
                for (double w : p.weights) {
                    if (!(w >= 0.0))
                        throw ConfigError("iid: negative weight");
                    total += w;
                }
                if (std::abs(total - 1.0) > kStochasticTolerance)
                    throw ConfigError("iid: weights do not sum to 1");
            },
            [](const MarkovParams& p) {
                const std::size_t n = p.transition.size();
                if (n == 0 || p.values.size() != n)
                    throw ConfigError("markov: need a square transition matrix and one value per state");
                for (const auto& row : p.transition) {
                    if (row.size() != n)
                        throw ConfigError("markov: transition matrix is not square");
                    double total = 0.0;
                    for (double w : row) {
                        if (!(w >= 0.0))
                            throw ConfigError("markov: negative transition probability");
                        total += w;
                    }
                    if (std::abs(total - 1.0) > kStochasticTolerance)
                        throw ConfigError("markov: transition row does not sum to 1");
                }
                if (!strongly_connected(p.transition))
                    throw ConfigError("markov: chain is reducible");
            },
            [](const MovingAverageParams& p) {
                if (!(p.rate > 0.0 && p.rate < 1.0))
                    throw ConfigError("moving_average: rate must lie in (0,1)");
            },
            [](const IntermittentParams& p) {
                if (!(p.z > 0.0 && p.z < 1.0))
                    throw ConfigError("intermittent: z must lie in (0,1)");
                if (p.pilot_length < 1000)
                    throw ConfigError("intermittent: pilot_length must be at least 1000");
            },
            [](const CocycleParams& p) {
                if (!std::isfinite(p.scale) || p.scale == 0.0)
                    throw ConfigError("cocycle: scale must be finite and non-zero");
            },
        },
        params);
}

PotentialProcess PotentialProcess::bernoulli(std::uint64_t seed)
{
    return {IidParams{}, seed, std::nullopt};
}

PotentialProcess PotentialProcess::two_state_markov(double flip, std::uint64_t seed)
{
    MarkovParams chain{{{1.0 - flip, flip}, {flip, 1.0 - flip}}, {-1.0, 1.0}};
    return {chain, seed, std::nullopt};
}

PotentialProcess PotentialProcess::moving_average(double rate, std::uint64_t seed)
{
    return {MovingAverageParams{rate}, seed, std::nullopt};
}

PotentialProcess PotentialProcess::intermittent(double z, std::uint64_t seed)
{
    return {IntermittentParams{z}, seed, std::nullopt};
}

PotentialProcess PotentialProcess::cocycle(double scale, std::uint64_t seed)
{
    return {CocycleParams{scale}, seed, std::nullopt};
}

std::vector<double> stationary_distribution(const MarkovParams& chain)
{
    const auto n = static_cast<Eigen::Index>(chain.transition.size());
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            a(i, j) = chain.transition[j][i] - (i == j ? 1.0 : 0.0);
    a.row(n - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(n - 1) = 1.0;
    const Eigen::VectorXd pi = a.fullPivLu().solve(rhs);
    return {pi.data(), pi.data() + n};
}

std::optional<double> exact_variance(const PotentialProcess& process)
{
    return std::visit(
        Overloaded{
            [](const IidParams& p) -> std::optional<double> {
                const double mean = iid_mean(p);
                double var = 0.0;
                for (std::size_t i = 0; i < p.values.size(); ++i)
                    var += p.weights[i] * (p.values[i] - mean) * (p.values[i] - mean);
                return var;
            },
            [](const MarkovParams& p) -> std::optional<double> {
                const auto pi = stationary_distribution(p);
                const double mean = std::inner_product(pi.begin(), pi.end(), p.values.begin(), 0.0);
                double var = 0.0;
                for (std::size_t i = 0; i < pi.size(); ++i)
                    var += pi[i] * (p.values[i] - mean) * (p.values[i] - mean);
                return var;
            },
            [](const MovingAverageParams& p) -> std::optional<double> {
                return 0.25 / (1.0 - p.rate * p.rate);
            },
            [](const IntermittentParams&) -> std::optional<double> { return std::nullopt; },
            [](const CocycleParams& p) -> std::optional<double> { return 0.5 * p.scale * p.scale; },
        },
        process.params);
}

double sup_norm(const PotentialProcess& process)
{
    return std::visit(
        Overloaded{
            [](const IidParams& p) {
                const double mean = iid_mean(p);
                double m = 0.0;
                for (double v : p.values)
                    m = std::max(m, std::abs(v - mean));
                return m;
            },
            [](const MarkovParams& p) {
                const auto pi = stationary_distribution(p);
                const double mean = std::inner_product(pi.begin(), pi.end(), p.values.begin(), 0.0);
                double m = 0.0;
                for (double v : p.values)
                    m = std::max(m, std::abs(v - mean));
                return m;
            },
            [](const MovingAverageParams& p) { return 0.5 / (1.0 - p.rate); },
            [](const IntermittentParams&) { return 1.0; },
            [](const CocycleParams& p) { return std::abs(p.scale); },
        },
        process.params);
}

PotentialStream::PotentialStream(const PotentialProcess& process, std::uint64_t stream_id)
{
    process.validate();
    const std::uint64_t seed = derive_seed(process.seed, stream_id);
    Generator gen = std::visit(
        Overloaded{
            [&](const IidParams& p) -> Generator {
                const double mean = iid_mean(p);
                std::vector<double> centered(p.values);
                for (double& v : centered)
                    v -= mean;
                return IidGen{Rng(seed), cumulative(p.weights), std::move(centered)};
            },
            [&](const MarkovParams& p) -> Generator {
                const auto pi = stationary_distribution(p);
                const double mean = std::inner_product(pi.begin(), pi.end(), p.values.begin(), 0.0);
                MarkovGen g{Rng(seed), {}, p.values, 0};
                for (double& v : g.centered)
                    v -= mean;
                for (const auto& row : p.transition)
                    g.cum.push_back(cumulative(row));
                return g;
            },
            [&](const MovingAverageParams& p) -> Generator {
                MovingAverageGen g{BitSource(seed), {}, {}, 0};
                for (double w = 1.0; w >= 1e-14; w *= p.rate)
                    g.powers.push_back(w);
                g.window.resize(g.powers.size());
                for (double& s : g.window)
                    s = g.bits.next() - 0.5;
                return g;
            },
            [&](const IntermittentParams& p) -> Generator {
                Rng rng(seed);
                const double x0 = rng.uniform();
                return IntermittentGen{std::move(rng), p.z, x0, intermittent_pilot_mean(process, p)};
            },
            [&](const CocycleParams& p) -> Generator {
                CocycleGen g{BitSource(seed), p.scale, 0};
                g.current = g.bits.next();
                return g;
            },
        },
        process.params);
    state_ = std::make_unique<State>(State{std::move(gen)});

    for (std::size_t i = 0; i < process.effective_burn_in(); ++i)
        state_->next();
}

PotentialStream::~PotentialStream() = default;
PotentialStream::PotentialStream(PotentialStream&&) noexcept = default;
PotentialStream& PotentialStream::operator=(PotentialStream&&) noexcept = default;

double PotentialStream::next() { return state_->next(); }

void PotentialStream::fill(std::span<double> out)
{
    std::visit(
        [&](auto& g) {
            for (double& v : out)
                v = g.next();
        },
        state_->gen);
}

std::vector<double> sample_stream(const PotentialProcess& process, std::size_t n, std::uint64_t stream_id)
{
    if (n == 0)
        throw std::invalid_argument("sample_stream: n must be at least 1");
    PotentialStream stream(process, stream_id);
    std::vector<double> out(n);
    stream.fill(out);
    return out;
}

std::vector<double> autocovariance(std::span<const double> data, std::size_t lag_max)
{
    const std::size_t n = data.size();
    if (lag_max >= n)
        throw std::invalid_argument("autocovariance: lag_max must be smaller than the sample length");
    std::vector<double> cov(lag_max + 1);
    for (std::size_t m = 0; m <= lag_max; ++m) {
        double sum = 0.0;
        for (std::size_t i = 0; i + m < n; ++i)
            sum += data[i] * data[i + m];
        cov[m] = sum / static_cast<double>(n - m);
    }
    return cov;
}

std::vector<double> autocovariance(const PotentialProcess& process, std::size_t lag_max, std::size_t n)
{
    const auto data = sample_stream(process, n);
    return autocovariance(data, lag_max);
}

MixingProfile fit_mixing_exponent(std::span<const double> covariances, double noise_floor)
{
    std::size_t usable = 0;
    while (usable + 1 < covariances.size() && std::abs(covariances[usable + 1]) > noise_floor)
        ++usable;

    MixingProfile profile;
    profile.lags_used = usable;
    if (usable == 0) {
        profile.white = true;
        profile.exponent = std::numeric_limits<double>::quiet_NaN();
        profile.constant = 0.0;
        return profile;
    }
    if (usable < 10)
        throw std::invalid_argument("fit_mixing_exponent: fewer than 10 lags above the noise floor");

    struct Line {
        double slope, intercept, rms;
    };
    auto fit = [&](auto abscissa) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double n = static_cast<double>(usable);
        for (std::size_t m = 1; m <= usable; ++m) {
            const double x = abscissa(static_cast<double>(m));
            const double y = std::log(std::abs(covariances[m]));
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        const double intercept = (sy - slope * sx) / n;
        double ss = 0.0;
        for (std::size_t m = 1; m <= usable; ++m) {
            const double r = std::log(std::abs(covariances[m])) -
                             (intercept + slope * abscissa(static_cast<double>(m)));
            ss += r * r;
        }
        return Line{slope, intercept, std::sqrt(ss / n)};
    };

    const Line exponential = fit([](double m) { return m; });
    const Line power = fit([](double m) { return std::log(m); });
    if (exponential.rms <= power.rms) {
        profile.kind = DecayKind::Exponential;
        profile.exponent = -exponential.slope;
        profile.constant = std::exp(exponential.intercept);
        profile.residual = exponential.rms;
    } else {
        profile.kind = DecayKind::PowerLaw;
        profile.exponent = -power.slope;
        profile.constant = std::exp(power.intercept);
        profile.residual = power.rms;
    }
    return profile;
}

}  // namespace locmix
