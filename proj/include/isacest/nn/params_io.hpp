#pragma once

// Parameter files:
//
//   ISACNN1\n
//   fingerprint <16 hex digits> <spec description>\n
//   layers <n>\n
//   <i> <W rows> <W cols> <b len>\n      (one line per layer)
//   data <value count>\n
//   float64 LE values, per layer W (column-major) then b

#include "isacest/binary_io.hpp"
#include "isacest/nn/network.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace isacest::nn {

inline constexpr const char* kParamsMagic = "ISACNN1";

inline std::string fingerprint(const NetworkSpec& spec) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(io::fnv1a(spec.describe())));
    return buf;
}

inline void save_params(const NetworkSpec& spec, const NetworkParams& params, std::ostream& os) {
    if (spec.layers.empty()) throw ShapeError("save_params: network has no layers");
    if (params.layers.size() != spec.layers.size()) throw ShapeError("save_params: params do not match spec");
    const auto ref = zero_params(spec);
    for (std::size_t i = 0; i < ref.layers.size(); ++i) {
        const auto& a = ref.layers[i];
        const auto& b = params.layers[i];
        if (a.W.rows() != b.W.rows() || a.W.cols() != b.W.cols() || a.b.size() != b.b.size())
            throw ShapeError("save_params: layer " + std::to_string(i) + " shape does not match spec");
    }
    os << kParamsMagic << '\n' << "fingerprint " << fingerprint(spec) << ' ' << spec.describe() << '\n';
    os << "layers " << params.layers.size() << '\n';
    for (std::size_t i = 0; i < params.layers.size(); ++i) {
        const auto& l = params.layers[i];
        os << i << ' ' << l.W.rows() << ' ' << l.W.cols() << ' ' << l.b.size() << '\n';
    }
    os << "data " << params.count() << '\n';
    for (const auto& l : params.layers) {
        io::write_block(os, l.W);
        io::write_block(os, l.b);
    }
    if (!os) throw Error("save_params: write failed");
}

inline NetworkParams load_params(const NetworkSpec& spec, std::istream& is) {
    if (io::read_line(is) != kParamsMagic) throw FormatError("not a parameter file");
    std::istringstream fp(io::read_line(is));
    std::string tag, hex;
    fp >> tag >> hex;
    if (tag != "fingerprint") throw FormatError("parameter file: missing fingerprint");
    if (hex != fingerprint(spec))
        throw FormatError("parameter file fingerprint " + hex + " does not match network " + fingerprint(spec));
    std::istringstream ls(io::read_line(is));
    std::size_t n = 0;
    ls >> tag >> n;
    NetworkParams p = zero_params(spec);
    if (tag != "layers" || n != p.layers.size()) throw FormatError("parameter file: layer count mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        std::istringstream row(io::read_line(is));
        std::size_t idx = 0;
        Eigen::Index r = 0, c = 0, b = 0;
        row >> idx >> r >> c >> b;
        const auto& l = p.layers[i];
        if (!row || idx != i || r != l.W.rows() || c != l.W.cols() || b != l.b.size())
            throw FormatError("parameter file: layer " + std::to_string(i) + " shape mismatch");
    }
    std::istringstream ds(io::read_line(is));
    Eigen::Index count = 0;
    ds >> tag >> count;
    if (tag != "data" || count != p.count()) throw FormatError("parameter file: value count mismatch");
    for (auto& l : p.layers) {
        io::read_block(is, l.W);
        RMat b(l.b.size(), 1);
        io::read_block(is, b);
        l.b = b.col(0);
    }
    return p;
}

inline void save_params(const NetworkSpec& spec, const NetworkParams& params, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open '" + path + "' for writing");
    save_params(spec, params, os);
}

inline NetworkParams load_params(const NetworkSpec& spec, const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open '" + path + "'");
    return load_params(spec, is);
}

}  // namespace isacest::nn
