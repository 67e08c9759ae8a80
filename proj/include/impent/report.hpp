#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <system_error>
#include <vector>

#include <openssl/evp.h>

#include "config.hpp"
#include "regularity.hpp"

namespace impent {

/// SHA-1 of "blob <size>\0<bytes>", the object id git assigns to the file.
inline std::string git_blob_hash(const std::string& bytes) {
    const std::string header = "blob " + std::to_string(bytes.size()) + std::string(1, '\0');
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx) throw std::runtime_error("sha1: cannot allocate digest context");
    const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                    EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                    EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) == 1 && EVP_DigestFinal_ex(ctx, md, &len) == 1;
    EVP_MD_CTX_free(ctx);
    if (!ok) throw std::runtime_error("sha1: digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

/// Writes to a sibling temp file, then renames over the target.
inline void write_atomic(const std::filesystem::path& target, const std::string& content) {
    auto tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) {
            out.close();
            std::filesystem::remove(tmp);
            throw std::runtime_error("write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw std::runtime_error("cannot rename into " + target.string() + ": " + ec.message());
    }
}

inline std::string fmt9(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
}

inline const char* kCsvHeader = "variant,mode,T,epsilon,delta,count,slope,residual,flags\n";

inline std::string counts_csv(const EntropyTable* tab) {
    std::string out = kCsvHeader;
    if (!tab) return out;
    const auto& cfg = tab->config;
    for (std::size_t d = 0; d < cfg.delta.size(); ++d)
        for (Variant v : kVariants)
            for (Mode m : kModes)
                for (std::size_t e = 0; e < cfg.epsilon.size(); ++e) {
                    const RateEntry& r = tab->rate(d, v, m, e);
                    for (std::size_t t = 0; t < cfg.T.size(); ++t) {
                        const NetCount& c = tab->cell(d, v, m, t, e);
                        std::string flags;
                        auto add = [&](const char* f) {
                            if (!flags.empty()) flags += ';';
                            flags += f;
                        };
                        if (c.saturated) add("saturated");
                        if (!c.witness_verified || (m == Mode::separated && !c.witness_spans)) add("unverified");
                        if (r.fit.residual > cfg.residual_tol) add("nonlinear");
                        if (r.fit.slope < -1e-12) add("clamped");
                        out += std::string(to_string(v)) + ',' + to_string(m) + ',' + fmt9(c.T) + ',' + fmt9(c.epsilon) + ',' +
                               fmt9(cfg.delta[d]) + ',' + std::to_string(c.count) + ',' + fmt9(r.fit.slope) + ',' +
                               fmt9(r.fit.residual) + ',' + flags + '\n';
                    }
                }
    return out;
}

inline json estimates_json(const EntropyEstimates& e) {
    json j = json::object();
    for (Variant v : kVariants)
        for (Mode m : kModes) j[estimate_name(v, m)] = e.get(v, m);
    return j;
}

inline json regularity_json(const RegularityReport& r) {
    json checks = json::array();
    for (const auto& c : r.checks)
        checks.push_back({{"name", c.name}, {"status", to_string(c.status)}, {"detail", c.detail}, {"value", c.value}});
    return {{"xi", r.xi},
            {"samples", r.samples},
            {"lipschitz_estimate", r.lipschitz_estimate},
            {"speed_estimate", r.speed_estimate},
            {"geometric_tolerance", r.geometric_tolerance},
            {"regular", r.regular()},
            {"evidence", "sampled evidence, not proof"},
            {"checks", checks}};
}

inline std::vector<std::string> flag_messages(const std::vector<TableFlag>& flags) {
    std::vector<std::string> out;
    for (const auto& f : flags) out.push_back(f.message);
    return out;
}

inline json table_json(const EntropyTable& t) {
    json rates = json::array();
    for (const auto& r : t.rates)
        rates.push_back({{"variant", to_string(r.variant)},
                         {"mode", to_string(r.mode)},
                         {"epsilon", r.epsilon},
                         {"delta", r.delta},
                         {"slope", r.fit.slope},
                         {"residual", r.fit.residual},
                         {"h", r.h}});
    return {{"sample", {{"descriptor", t.sample_descriptor}, {"size", t.sample_size}}},
            {"ladders", {{"T", t.config.T}, {"epsilon", t.config.epsilon}, {"delta", t.config.delta}, {"m", t.config.m}}},
            {"estimates", estimates_json(t.estimates)},
            {"rates", rates},
            {"flags", flag_messages(t.flags)},
            {"bias_notes", t.notes}};
}

} // namespace impent
