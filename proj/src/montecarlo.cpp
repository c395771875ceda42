#include "aekmu/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "aekmu/errors.hpp"
#include "aekmu/foxh.hpp"
#include "aekmu/specfun.hpp"

namespace aekmu::mc {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// SplitMix64 finalizer: bijective 64-bit mix
inline std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

inline std::uint64_t bits_at(std::uint64_t seed, std::uint64_t stream, std::uint64_t ctr) {
    // two mixing rounds over the keyed counter; the key decorrelates streams
    const std::uint64_t key = mix64(seed + kGolden * (stream + 1));
    return mix64(mix64(key ^ (ctr * kGolden)) + key);
}

} // namespace

double RandomStream::uniform_at(std::uint64_t ctr) const {
    const std::uint64_t b = bits_at(seed, stream_id, ctr);
    // 53-bit mantissa, shifted into (0, 1]
    return ((b >> 11) + 1.0) * 0x1.0p-53;
}

RandomStream RandomStream::split(std::uint64_t sub_id) const {
    return RandomStream(seed, mix64(stream_id + kGolden * (sub_id + 1)));
}

std::pair<double, double> normal_pair(RandomStream& stream) {
    const double u1 = stream.uniform_at(stream.counter);
    const double u2 = stream.uniform_at(stream.counter + 1);
    stream.counter += 2;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double th = 2.0 * M_PI * u2;
    return {r * std::cos(th), r * std::sin(th)};
}

Histogram::Histogram(std::vector<double> bin_edges) : edges(std::move(bin_edges)) {
    if (edges.size() < 2) throw DomainError("Histogram: need at least two edges");
    for (std::size_t i = 1; i < edges.size(); ++i)
        if (!(edges[i] > edges[i - 1]))
            throw DomainError("Histogram: edges must be strictly increasing");
    counts.assign(edges.size() - 1, 0);
}

void Histogram::add(double x) {
    ++total;
    if (x < edges.front()) {
        ++underflow;
        return;
    }
    if (x >= edges.back()) {
        ++overflow;
        return;
    }
    const auto it = std::upper_bound(edges.begin(), edges.end(), x);
    ++counts[static_cast<std::size_t>(it - edges.begin()) - 1];
}

void Histogram::merge(const Histogram& other) {
    if (other.edges != edges) throw DomainError("Histogram::merge: incompatible edges");
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
    total += other.total;
    underflow += other.underflow;
    overflow += other.overflow;
}

double Histogram::density(std::size_t bin) const {
    if (total == 0) return 0.0;
    return static_cast<double>(counts[bin]) / (static_cast<double>(total) * width(bin));
}

double Histogram::stderror(std::size_t bin) const {
    if (total == 0) return 0.0;
    const double p = static_cast<double>(counts[bin]) / static_cast<double>(total);
    return std::sqrt(p * (1.0 - p) / static_cast<double>(total)) / width(bin);
}

Histogram estimate_pdf(const std::vector<double>& samples, std::vector<double> edges) {
    if (samples.empty()) throw EmptyInput("estimate_pdf: no samples");
    Histogram h(std::move(edges));
    for (double x : samples) h.add(x);
    return h;
}

std::pair<double, double> estimate_outage(const std::vector<double>& snr_samples,
                                          double gamma_th) {
    if (snr_samples.empty()) throw EmptyInput("estimate_outage: no samples");
    std::uint64_t below = 0;
    for (double g : snr_samples)
        if (g < gamma_th) ++below;
    const double n = static_cast<double>(snr_samples.size());
    const double p = below / n;
    return {p, std::sqrt(p * (1.0 - p) / n)};
}

std::pair<double, double> estimate_ber(const std::vector<double>& snr_samples, double p_m,
                                       double q_m) {
    if (snr_samples.empty()) throw EmptyInput("estimate_ber: no samples");
    // conditional BER Q(p_m, q_m * gamma)/2; second moment for the SE
    double sum = 0.0, sum2 = 0.0, c = 0.0, c2 = 0.0;
    for (double g : snr_samples) {
        const double v = 0.5 * specfun::gamma_q(p_m, q_m * g);
        double y = v - c;
        double t = sum + y;
        c = (t - sum) - y;
        sum = t;
        y = v * v - c2;
        t = sum2 + y;
        c2 = (t - sum2) - y;
        sum2 = t;
    }
    const double n = static_cast<double>(snr_samples.size());
    const double mean = sum / n;
    const double var = std::max(0.0, sum2 / n - mean * mean);
    return {mean, std::sqrt(var / n)};
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw EmptyInput("ks_statistic: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    double d = 0.0;
    std::size_t ia = 0, ib = 0;
    while (ia < a.size() && ib < b.size()) {
        if (a[ia] <= b[ib])
            ++ia;
        else
            ++ib;
        d = std::max(d, std::abs(ia / na - ib / nb));
    }
    return d;
}

void parallel_fill(std::vector<double>& out, std::uint64_t count,
                   const std::function<double(std::uint64_t)>& fn, int threads) {
    out.resize(count);
    const int nt = threads > 0 ? threads : foxh::default_threads();
    if (nt <= 1 || count < 4096) {
        for (std::uint64_t i = 0; i < count; ++i) out[i] = fn(i);
        return;
    }
    constexpr std::uint64_t kBlock = 16384;
    std::atomic<std::uint64_t> next{0};
    auto work = [&]() {
        for (;;) {
            const std::uint64_t b = next.fetch_add(kBlock);
            if (b >= count) return;
            const std::uint64_t e = std::min(count, b + kBlock);
            for (std::uint64_t i = b; i < e; ++i) out[i] = fn(i);
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
}

} // namespace aekmu::mc
