#include "fairal/surrogate.hpp"

#include <algorithm>
#include <cmath>

#include "fairal/rng.hpp"

namespace fairal {

namespace {

// Fixed bump sector shared by every Group-1 case: unit direction and the
// cosine of the sector half-angle. The squared ramp over a hemisphere
// yields a wide, shallow surface lens rather than a pointed spike.
constexpr double kSectorDir[3] = {0.8728715609439696, 0.4364357804719848, 0.2182178902359924};
constexpr double kSectorCos = 0.0;

// Base target radius as a fraction of the smallest extent.
constexpr double kBaseRadiusFrac = 0.30;

// Global deformation analog: center jitter (voxels), log-normal sigmas
// for the shared scale and the per-axis anisotropy.
constexpr double kCenterJitter = 0.75;
constexpr double kScaleSigma = 0.05;
constexpr double kAxisSigma = 0.08;

// Linear background gradient coefficient spread.
constexpr double kGradientSigma = 0.45;

double softplus(double z) {
    return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double normalized_coord(std::uint32_t i, std::uint32_t n) {
    if (n <= 1) return 0.0;
    return (2.0 * static_cast<double>(i) - static_cast<double>(n - 1)) / static_cast<double>(n - 1);
}

} // namespace

void CohortConfig::validate() const {
    volume_shape.validate();
    if (n_per_group < 1) throw ConfigError("cohort: n_per_group must be >= 1");
    if (bias_sigma < 0.0) throw ConfigError("cohort: bias_sigma must be >= 0");
    if (noise_sigma < 0.0) throw ConfigError("cohort: noise_sigma must be >= 0");
    const std::uint32_t min_extent = std::min({volume_shape.nx, volume_shape.ny, volume_shape.nz});
    if (kBaseRadiusFrac * min_extent < 2.0) {
        throw ConfigError("cohort: shape too small to contain the target ellipsoid");
    }
}

CohortConfig strong_bias_preset() {
    CohortConfig cfg;
    cfg.bias_mu = 4.0;
    cfg.bias_sigma = 2.0;
    return cfg;
}

CohortConfig weak_bias_preset() {
    CohortConfig cfg;
    cfg.bias_mu = 2.0;
    cfg.bias_sigma = 2.0;
    return cfg;
}

namespace {

Case generate_case(const CohortConfig& cfg, std::size_t case_index) {
    const VolumeShape& s = cfg.volume_shape;
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(case_index)));

    char id[16];
    std::snprintf(id, sizeof(id), "case_%05zu", case_index);
    const GroupId group = (case_index % 2 == 0) ? kGroup1 : kGroup2;

    // Global deformation analog: jittered center, global scale, mild
    // per-axis anisotropy.
    const double cx = 0.5 * (s.nx - 1) + rng.uniform(-kCenterJitter, kCenterJitter);
    const double cy = 0.5 * (s.ny - 1) + rng.uniform(-kCenterJitter, kCenterJitter);
    const double cz = 0.5 * (s.nz - 1) + rng.uniform(-kCenterJitter, kCenterJitter);
    const double base_r = kBaseRadiusFrac * std::min({s.nx, s.ny, s.nz});
    const double scale = std::exp(rng.normal(0.0, kScaleSigma));
    const double rx = base_r * scale * std::exp(rng.normal(0.0, kAxisSigma));
    const double ry = base_r * scale * std::exp(rng.normal(0.0, kAxisSigma));
    const double rz = base_r * scale * std::exp(rng.normal(0.0, kAxisSigma));

    // Bump magnitude is drawn for both groups (keeping the draw layout
    // identical) but only applied to Group 1.
    const double bump_draw = std::max(0.0, rng.normal(cfg.bias_mu, cfg.bias_sigma));
    const double bump = (group.id == kGroup1.id) ? bump_draw : 0.0;

    const double gx = rng.normal(0.0, kGradientSigma);
    const double gy = rng.normal(0.0, kGradientSigma);
    const double gz = rng.normal(0.0, kGradientSigma);

    Case c;
    c.case_id = id;
    c.group = group;
    c.truth = BinaryMask::filled(s, false);
    c.image = ScalarVolume::filled(s, 0.0);

    for (std::uint32_t z = 0; z < s.nz; ++z) {
        for (std::uint32_t y = 0; y < s.ny; ++y) {
            for (std::uint32_t x = 0; x < s.nx; ++x) {
                const double ux = x - cx;
                const double uy = y - cy;
                const double uz = z - cz;
                const double dist = std::sqrt(ux * ux + uy * uy + uz * uz);
                bool inside;
                if (dist < 1e-12) {
                    inside = true;
                } else {
                    // Euclidean distance from center to the ellipsoid
                    // surface along this ray.
                    const double qx = ux / (dist * rx);
                    const double qy = uy / (dist * ry);
                    const double qz = uz / (dist * rz);
                    const double surface = 1.0 / std::sqrt(qx * qx + qy * qy + qz * qz);
                    double displaced = surface;
                    if (bump > 0.0) {
                        const double cosang =
                            (ux * kSectorDir[0] + uy * kSectorDir[1] + uz * kSectorDir[2]) / dist;
                        const double ramp =
                            std::clamp((cosang - kSectorCos) / (1.0 - kSectorCos), 0.0, 1.0);
                        displaced += bump * ramp * ramp;
                    }
                    inside = dist <= displaced;
                }
                if (inside) c.truth.set(x, y, z, true);
            }
        }
    }

    if (c.truth.empty_mask()) {
        throw ConfigError("cohort: generated an empty target; shape too small");
    }

    // Foreground 1.0, background 0.0, plus a linear background gradient
    // and voxel noise.
    for (std::uint32_t z = 0; z < s.nz; ++z) {
        const double tz = normalized_coord(z, s.nz);
        for (std::uint32_t y = 0; y < s.ny; ++y) {
            const double ty = normalized_coord(y, s.ny);
            for (std::uint32_t x = 0; x < s.nx; ++x) {
                const double tx = normalized_coord(x, s.nx);
                double v = c.truth.at(x, y, z) ? 1.0 : 0.0;
                v += gx * tx + gy * ty + gz * tz;
                v += cfg.noise_sigma * rng.normal();
                c.image.at(x, y, z) = v;
            }
        }
    }
    return c;
}

} // namespace

std::vector<Case> generate_cohort(const CohortConfig& cfg) {
    cfg.validate();
    std::vector<Case> cohort;
    cohort.reserve(2 * cfg.n_per_group);
    for (std::size_t i = 0; i < 2 * cfg.n_per_group; ++i) {
        cohort.push_back(generate_case(cfg, i));
    }
    return cohort;
}

FeatureVector extract_features(const ScalarVolume& image,
                               std::uint32_t x, std::uint32_t y, std::uint32_t z) {
    const VolumeShape& s = image.shape;
    FeatureVector f{};
    f[0] = 1.0;
    f[1] = image.at(x, y, z);

    double sum = 0.0;
    int n = 0;
    const std::uint32_t x0 = x > 0 ? x - 1 : 0, x1 = std::min(x + 1, s.nx - 1);
    const std::uint32_t y0 = y > 0 ? y - 1 : 0, y1 = std::min(y + 1, s.ny - 1);
    const std::uint32_t z0 = z > 0 ? z - 1 : 0, z1 = std::min(z + 1, s.nz - 1);
    for (std::uint32_t zz = z0; zz <= z1; ++zz)
        for (std::uint32_t yy = y0; yy <= y1; ++yy)
            for (std::uint32_t xx = x0; xx <= x1; ++xx) {
                sum += image.at(xx, yy, zz);
                ++n;
            }
    f[2] = sum / n;

    f[3] = normalized_coord(x, s.nx);
    f[4] = normalized_coord(y, s.ny);
    f[5] = normalized_coord(z, s.nz);
    f[6] = std::sqrt(f[3] * f[3] + f[4] * f[4] + f[5] * f[5]) / std::sqrt(3.0);
    return f;
}

TrainingSet build_training_set(const std::vector<Case>& labeled, std::uint64_t seed) {
    TrainingSet out;
    for (const auto& c : labeled) {
        const std::size_t total = c.truth.shape.total();
        std::vector<std::size_t> background;
        std::vector<std::size_t> foreground;
        for (std::size_t i = 0; i < total; ++i) {
            (c.truth.data[i] ? foreground : background).push_back(i);
        }
        // Equal-count background sample, case-addressed seed so a case's
        // rows do not depend on its position in the labeled list.
        Rng rng(derive_seed(seed, c.case_id));
        const std::size_t want = std::min(foreground.size(), background.size());
        for (std::size_t i = 0; i < want; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng.bounded(background.size() - i));
            std::swap(background[i], background[j]);
        }
        background.resize(want);

        const VolumeShape& s = c.truth.shape;
        auto push_rows = [&](const std::vector<std::size_t>& idx, double label) {
            for (std::size_t flat : idx) {
                const std::uint32_t x = static_cast<std::uint32_t>(flat % s.nx);
                const std::uint32_t y = static_cast<std::uint32_t>((flat / s.nx) % s.ny);
                const std::uint32_t z = static_cast<std::uint32_t>(flat / (static_cast<std::size_t>(s.nx) * s.ny));
                out.features.push_back(extract_features(c.image, x, y, z));
                out.labels.push_back(label);
            }
        };
        push_rows(foreground, 1.0);
        push_rows(background, 0.0);
    }
    return out;
}

double bce_loss(const SegmenterParams& params, const TrainingSet& rows, double l2) {
    const std::size_t m = rows.labels.size();
    double loss = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double zlin = 0.0;
        for (std::size_t j = 0; j < kFeatureCount; ++j) zlin += params.w[j] * rows.features[i][j];
        loss += softplus(zlin) - rows.labels[i] * zlin;
    }
    loss /= static_cast<double>(m);
    for (double wj : params.w) loss += l2 * wj * wj;
    return loss;
}

std::array<double, kFeatureCount> bce_gradient(const SegmenterParams& params,
                                               const TrainingSet& rows, double l2) {
    const std::size_t m = rows.labels.size();
    std::array<double, kFeatureCount> grad{};
    for (std::size_t i = 0; i < m; ++i) {
        double zlin = 0.0;
        for (std::size_t j = 0; j < kFeatureCount; ++j) zlin += params.w[j] * rows.features[i][j];
        const double err = sigmoid(zlin) - rows.labels[i];
        for (std::size_t j = 0; j < kFeatureCount; ++j) grad[j] += err * rows.features[i][j];
    }
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
        grad[j] = grad[j] / static_cast<double>(m) + 2.0 * l2 * params.w[j];
    }
    return grad;
}

SegmenterParams train(const std::vector<Case>& labeled, const TrainConfig& hyper) {
    if (labeled.empty()) throw ConfigError("train: labeled set is empty");
    const TrainingSet rows = build_training_set(labeled, hyper.seed);
    SegmenterParams params; // zero init
    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        const auto grad = bce_gradient(params, rows, hyper.l2);
        for (std::size_t j = 0; j < kFeatureCount; ++j) {
            params.w[j] -= hyper.learning_rate * grad[j];
        }
    }
    return params;
}

ProbabilityVolume predict(const SegmenterParams& params, const ScalarVolume& image) {
    const VolumeShape& s = image.shape;
    ProbabilityVolume out{s, std::vector<double>(s.total())};
    std::size_t i = 0;
    for (std::uint32_t z = 0; z < s.nz; ++z) {
        for (std::uint32_t y = 0; y < s.ny; ++y) {
            for (std::uint32_t x = 0; x < s.nx; ++x, ++i) {
                const FeatureVector f = extract_features(image, x, y, z);
                double zlin = 0.0;
                for (std::size_t j = 0; j < kFeatureCount; ++j) zlin += params.w[j] * f[j];
                out.data[i] = sigmoid(zlin);
            }
        }
    }
    return out;
}

double evaluate_dice(const SegmenterParams& params, const Case& c, double threshold_value) {
    const ProbabilityVolume probs = predict(params, c.image);
    return dice(threshold(probs, threshold_value), c.truth);
}

std::vector<CaseScore> evaluate_cases(const SegmenterParams& params,
                                      const std::vector<Case>& cases,
                                      double threshold_value) {
    std::vector<CaseScore> out;
    out.reserve(cases.size());
    for (const auto& c : cases) {
        out.push_back({c.case_id, c.group, evaluate_dice(params, c, threshold_value)});
    }
    return out;
}

} // namespace fairal
