// Copyright vnodesim contributors.
// SPDX-License-Identifier: Apache-2.0
#include "vnodesim/layout.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

namespace vnodesim {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::uint64_t parse_cpu_list(const std::string& s) {
    std::uint64_t mask = 0;
    for (const std::string& part : split(s, '+')) {
        const auto dash = part.find('-');
        unsigned lo, hi;
        try {
            if (dash == std::string::npos) {
                lo = hi = static_cast<unsigned>(std::stoul(part));
            } else {
                lo = static_cast<unsigned>(std::stoul(part.substr(0, dash)));
                hi = static_cast<unsigned>(std::stoul(part.substr(dash + 1)));
            }
        } catch (const std::exception&) {
            throw sim_error(errc::parse_error, "bad cpu list '" + s + "'");
        }
        if (lo > hi || hi >= 64)
            throw sim_error(errc::parse_error, "bad cpu list '" + s + "'");
        for (unsigned c = lo; c <= hi; ++c) mask |= 1ull << c;
    }
    return mask;
}

std::string format_cpu_list(std::uint64_t mask) {
    std::string out;
    for (unsigned c = 0; c < 64; ++c) {
        if (mask & (1ull << c)) {
            if (!out.empty()) out += '+';
            out += std::to_string(c);
        }
    }
    return out;
}

// threshold accepts absolute sizes and "3.5%" of total.
std::uint64_t parse_threshold(const std::string& s, std::uint64_t total_bytes) {
    if (!s.empty() && s.back() == '%') {
        const std::string num = s.substr(0, s.size() - 1);
        char* end = nullptr;
        const double pct = std::strtod(num.c_str(), &end);
        if (end == num.c_str() || *end != '\0' || pct < 0.0 || pct > 100.0)
            throw sim_error(errc::parse_error, "bad threshold percentage '" + s + "'");
        return static_cast<std::uint64_t>(
            std::llround(static_cast<double>(total_bytes) * pct / 100.0));
    }
    return parse_size(s);
}

node_spec parse_node_spec(const std::string& text, std::uint64_t global_threshold) {
    const std::vector<std::string> fields = split(text, ':');
    if (fields.size() < 3)
        throw sim_error(errc::parse_error, "node spec '" + text + "' needs name:size:trust");
    node_spec spec;
    spec.name = fields[0];
    if (spec.name.empty())
        throw sim_error(errc::parse_error, "empty node name in '" + text + "'");
    spec.size_bytes = parse_size(fields[1]);
    if (spec.size_bytes == 0 || spec.size_bytes % kPageBytes != 0)
        throw sim_error(errc::parse_error,
                        "node size must be a positive multiple of 4K in '" + text + "'");
    for (const std::string& lab : split(fields[2], '+')) spec.labels.push_back(parse_trust_label(lab));
    spec.lmk_threshold_bytes = global_threshold;
    for (std::size_t i = 3; i < fields.size(); ++i) {
        const std::string& f = fields[i];
        if (f.rfind("cpus=", 0) == 0) {
            spec.cpu_mask = parse_cpu_list(f.substr(5));
        } else if (f.rfind("threshold=", 0) == 0) {
            spec.lmk_threshold_bytes = parse_size(f.substr(10));
        } else {
            throw sim_error(errc::parse_error, "unknown node field '" + f + "'");
        }
    }
    return spec;
}

}  // namespace

const char* trust_label_name(trust_label t) {
    switch (t) {
    case trust_label::trusted: return "Trusted";
    case trust_label::untrusted: return "Untrusted";
    case trust_label::responsive_aware: return "ResponsiveAware";
    case trust_label::telecom_builtin: return "TelecomBuiltin";
    }
    return "?";
}

trust_label parse_trust_label(const std::string& s) {
    if (s == "Trusted") return trust_label::trusted;
    if (s == "Untrusted") return trust_label::untrusted;
    if (s == "ResponsiveAware") return trust_label::responsive_aware;
    if (s == "TelecomBuiltin") return trust_label::telecom_builtin;
    throw sim_error(errc::parse_error, "unknown trust label '" + s + "'");
}

std::uint64_t parse_size(const std::string& s) {
    if (s.empty()) throw sim_error(errc::parse_error, "empty size");
    std::uint64_t mult = 1;
    std::string digits = s;
    switch (s.back()) {
    case 'K': mult = 1024ull; break;
    case 'M': mult = 1024ull * 1024; break;
    case 'G': mult = 1024ull * 1024 * 1024; break;
    default: break;
    }
    if (mult != 1) digits = s.substr(0, s.size() - 1);
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(),
                                       [](unsigned char c) { return std::isdigit(c); }))
        throw sim_error(errc::parse_error, "bad size '" + s + "'");
    return std::stoull(digits) * mult;
}

std::string format_size(std::uint64_t bytes) {
    const std::uint64_t g = 1024ull * 1024 * 1024, m = 1024ull * 1024, k = 1024ull;
    if (bytes != 0 && bytes % g == 0) return std::to_string(bytes / g) + "G";
    if (bytes != 0 && bytes % m == 0) return std::to_string(bytes / m) + "M";
    if (bytes != 0 && bytes % k == 0) return std::to_string(bytes / k) + "K";
    return std::to_string(bytes);
}

std::uint32_t memory_layout::route(trust_label t) const {
    auto it = trust_routing.find(t);
    if (it == trust_routing.end())
        throw sim_error(errc::unroutable_trust_class,
                        std::string("no node routes trust class ") + trust_label_name(t));
    for (std::uint32_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].name == it->second) return i;
    throw sim_error(errc::unroutable_trust_class, "routing names unknown node " + it->second);
}

memory_layout parse_boot_layout(const std::string& text) {
    memory_layout layout;
    std::string total_tok, threshold_tok, vnode_tok;
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) {
        if (tok.rfind("total=", 0) == 0) {
            if (!total_tok.empty()) throw sim_error(errc::parse_error, "duplicate total=");
            total_tok = tok.substr(6);
        } else if (tok.rfind("threshold=", 0) == 0) {
            if (!threshold_tok.empty()) throw sim_error(errc::parse_error, "duplicate threshold=");
            threshold_tok = tok.substr(10);
        } else if (tok.rfind("vnode=", 0) == 0) {
            if (!vnode_tok.empty()) throw sim_error(errc::parse_error, "duplicate vnode=");
            vnode_tok = tok.substr(6);
        } else {
            throw sim_error(errc::parse_error, "unknown token '" + tok + "'");
        }
    }
    if (total_tok.empty()) throw sim_error(errc::parse_error, "missing total=");
    if (vnode_tok.empty()) throw sim_error(errc::parse_error, "missing vnode=");

    layout.total_bytes = parse_size(total_tok);
    if (layout.total_bytes == 0 || layout.total_bytes % kPageBytes != 0)
        throw sim_error(errc::parse_error, "total must be a positive multiple of 4K");

    layout.global_threshold_bytes =
        threshold_tok.empty()
            ? layout.total_bytes * kDefaultThresholdNum / kDefaultThresholdDen
            : parse_threshold(threshold_tok, layout.total_bytes);

    std::uint64_t sum = 0;
    std::set<std::string> names;
    for (const std::string& part : split(vnode_tok, ',')) {
        node_spec spec = parse_node_spec(part, layout.global_threshold_bytes);
        if (!names.insert(spec.name).second)
            throw sim_error(errc::duplicate_name, "node '" + spec.name + "' declared twice");
        sum += spec.size_bytes;
        for (trust_label lab : spec.labels) {
            auto [it, fresh] = layout.trust_routing.emplace(lab, spec.name);
            if (!fresh)
                throw sim_error(errc::unroutable_trust_class,
                                std::string(trust_label_name(lab)) +
                                    " routed to both '" + it->second + "' and '" + spec.name + "'");
        }
        layout.nodes.push_back(std::move(spec));
    }
    if (sum != layout.total_bytes)
        throw sim_error(errc::overcommit, "node sizes sum to " + format_size(sum) +
                                              ", total is " + format_size(layout.total_bytes));
    return layout;
}

std::string format_layout(const memory_layout& l) {
    std::string out = "total=" + format_size(l.total_bytes) +
                      " threshold=" + format_size(l.global_threshold_bytes) + " vnode=";
    bool first = true;
    for (const node_spec& n : l.nodes) {
        if (!first) out += ',';
        first = false;
        out += n.name + ':' + format_size(n.size_bytes) + ':';
        for (std::size_t i = 0; i < n.labels.size(); ++i) {
            if (i) out += '+';
            out += trust_label_name(n.labels[i]);
        }
        if (n.cpu_mask != 0) out += ":cpus=" + format_cpu_list(n.cpu_mask);
        if (n.lmk_threshold_bytes != l.global_threshold_bytes)
            out += ":threshold=" + format_size(n.lmk_threshold_bytes);
    }
    return out;
}

}  // namespace vnodesim
