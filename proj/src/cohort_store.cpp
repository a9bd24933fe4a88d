#include "fairal/cohort_store.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include <json.hpp>

#include "fairal/fvol_io.hpp"
#include "fairal/rng.hpp"

namespace fairal {

namespace {

using nlohmann::json;

std::string to_hex16(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

} // namespace

std::string file_digest(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open for digest: " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[4096];
    while (is.read(buf, sizeof(buf)) || is.gcount() > 0) {
        for (std::streamsize i = 0; i < is.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
        if (!is) break;
    }
    return to_hex16(h);
}

CohortManifest save_cohort(const std::filesystem::path& dir,
                           const std::vector<Case>& cases,
                           const CohortConfig& cfg,
                           const std::string& preset) {
    std::filesystem::create_directories(dir);

    CohortManifest manifest;
    manifest.preset = preset;
    manifest.config = cfg;

    for (const auto& c : cases) {
        CohortCaseEntry e;
        e.case_id = c.case_id;
        e.group = c.group;
        e.image_file = c.case_id + "_img.fvol";
        e.truth_file = c.case_id + "_seg.fvol";
        write_fvol(dir / e.image_file, c.image);
        write_fvol(dir / e.truth_file, c.truth);
        e.image_digest = file_digest(dir / e.image_file);
        e.truth_digest = file_digest(dir / e.truth_file);
        manifest.cases.push_back(std::move(e));
    }

    json j;
    j["format_version"] = manifest.format_version;
    j["preset"] = manifest.preset;
    j["generator"] = {
        {"shape", {cfg.volume_shape.nx, cfg.volume_shape.ny, cfg.volume_shape.nz}},
        {"n_per_group", cfg.n_per_group},
        {"bias_mu", cfg.bias_mu},
        {"bias_sigma", cfg.bias_sigma},
        {"noise_sigma", cfg.noise_sigma},
        {"seed", cfg.seed},
    };
    j["cases"] = json::array();
    for (const auto& e : manifest.cases) {
        j["cases"].push_back({
            {"case_id", e.case_id},
            {"group_id", e.group.id},
            {"group_name", e.group.name},
            {"image", e.image_file},
            {"truth", e.truth_file},
            {"image_digest", e.image_digest},
            {"truth_digest", e.truth_digest},
        });
    }

    std::ofstream os(dir / "cohort.json", std::ios::trunc);
    if (!os) throw DataError("cannot write manifest in " + dir.string());
    os << j.dump(2) << '\n';
    return manifest;
}

LoadedCohort load_cohort(const std::filesystem::path& dir) {
    const auto manifest_path = dir / "cohort.json";
    std::ifstream is(manifest_path);
    if (!is) throw DataError("missing cohort manifest: " + manifest_path.string());

    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw DataError("malformed cohort manifest: " + std::string(e.what()));
    }

    LoadedCohort out;
    try {
        out.manifest.format_version = j.at("format_version").get<int>();
        out.manifest.preset = j.at("preset").get<std::string>();
        const auto& g = j.at("generator");
        const auto shape = g.at("shape").get<std::vector<std::uint32_t>>();
        if (shape.size() != 3) throw DataError("cohort manifest: shape must have 3 extents");
        out.manifest.config.volume_shape = {shape[0], shape[1], shape[2]};
        out.manifest.config.n_per_group = g.at("n_per_group").get<std::size_t>();
        out.manifest.config.bias_mu = g.at("bias_mu").get<double>();
        out.manifest.config.bias_sigma = g.at("bias_sigma").get<double>();
        out.manifest.config.noise_sigma = g.at("noise_sigma").get<double>();
        out.manifest.config.seed = g.at("seed").get<std::uint64_t>();

        for (const auto& je : j.at("cases")) {
            CohortCaseEntry e;
            e.case_id = je.at("case_id").get<std::string>();
            e.group = {je.at("group_id").get<int>(), je.at("group_name").get<std::string>()};
            e.image_file = je.at("image").get<std::string>();
            e.truth_file = je.at("truth").get<std::string>();
            e.image_digest = je.at("image_digest").get<std::string>();
            e.truth_digest = je.at("truth_digest").get<std::string>();
            out.manifest.cases.push_back(std::move(e));
        }
    } catch (const json::exception& e) {
        throw DataError("cohort manifest: " + std::string(e.what()));
    }

    for (const auto& e : out.manifest.cases) {
        if (file_digest(dir / e.image_file) != e.image_digest ||
            file_digest(dir / e.truth_file) != e.truth_digest) {
            throw DataError("cohort file digest mismatch for " + e.case_id);
        }
        Case c;
        c.case_id = e.case_id;
        c.group = e.group;
        c.image = read_fvol_scalar(dir / e.image_file);
        c.truth = read_fvol_mask(dir / e.truth_file);
        if (c.image.shape != c.truth.shape) {
            throw DataError("cohort case " + e.case_id + ": image/truth shape mismatch");
        }
        out.cases.push_back(std::move(c));
    }
    return out;
}

CohortSplit split_cohort(const std::vector<Case>& cases, std::size_t n_test_per_group) {
    std::map<int, std::vector<std::size_t>> by_group;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        by_group[cases[i].group.id].push_back(i);
    }
    std::vector<bool> is_test(cases.size(), false);
    for (auto& [gid, idxs] : by_group) {
        std::sort(idxs.begin(), idxs.end(), [&](std::size_t a, std::size_t b) {
            return cases[a].case_id < cases[b].case_id;
        });
        if (idxs.size() <= n_test_per_group) {
            throw ConfigError("test split leaves no training cases for a group");
        }
        for (std::size_t k = idxs.size() - n_test_per_group; k < idxs.size(); ++k) {
            is_test[idxs[k]] = true;
        }
    }
    CohortSplit split;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        (is_test[i] ? split.test : split.train).push_back(cases[i]);
    }
    return split;
}

} // namespace fairal
