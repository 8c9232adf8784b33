#pragma once

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gcsp/anneal.hpp"
#include "gcsp/cell.hpp"

namespace gcsp {

/// Extended-XYZ: atom count, a comment line carrying the lattice vectors and
/// periodicity, then one "symbol x y z" line per atom.
inline std::string to_xyz(const AtomList& atoms, const UnitCell& cell, const SpeciesSet& species,
                          const std::string& comment_extra = "") {
    std::ostringstream out;
    out << atoms.size() << "\n";
    out << std::setprecision(12);
    out << "Lattice=\"";
    for (int i = 0; i < 3; ++i) {
        const Vec3& a = cell.basis(i);
        out << a.x << " " << a.y << " " << a.z << (i < 2 ? " " : "");
    }
    out << "\" Properties=species:S:1:pos:R:3 pbc=\"";
    for (int i = 0; i < 3; ++i) out << (cell.periodic(i) ? "T" : "F") << (i < 2 ? " " : "");
    out << "\"";
    if (!comment_extra.empty()) out << " " << comment_extra;
    out << "\n";
    for (const auto& a : atoms)
        out << species[a.species].name << " " << a.pos.x << " " << a.pos.y << " " << a.pos.z
            << "\n";
    return out.str();
}

inline void write_xyz(const std::string& path, const AtomList& atoms, const UnitCell& cell,
                      const SpeciesSet& species, const std::string& comment_extra = "") {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open xyz file for writing: " + path);
    out << to_xyz(atoms, cell, species, comment_extra);
}

/// Bitstring <-> hex. Bit v maps to byte v/8, bit v%8 (LSB first); the hex
/// string lists bytes in order.
inline std::string bits_to_hex(const std::vector<std::uint8_t>& bits) {
    static const char* digits = "0123456789abcdef";
    std::vector<std::uint8_t> bytes((bits.size() + 7) / 8, 0);
    for (std::size_t v = 0; v < bits.size(); ++v)
        if (bits[v]) bytes[v / 8] |= static_cast<std::uint8_t>(1u << (v % 8));
    std::string s;
    s.reserve(bytes.size() * 2);
    for (auto b : bytes) {
        s.push_back(digits[b >> 4]);
        s.push_back(digits[b & 0xf]);
    }
    return s;
}

inline std::vector<std::uint8_t> hex_to_bits(const std::string& hex, int num_vars) {
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(num_vars), 0);
    const auto nyb = [&](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw std::runtime_error("bad hex digit in bitstring");
    };
    if (hex.size() != 2 * ((static_cast<std::size_t>(num_vars) + 7) / 8))
        throw std::runtime_error("bitstring hex length mismatch");
    for (int v = 0; v < num_vars; ++v) {
        const std::size_t byte = static_cast<std::size_t>(v) / 8;
        const int val = nyb(hex[2 * byte]) * 16 + nyb(hex[2 * byte + 1]);
        bits[static_cast<std::size_t>(v)] = (val >> (v % 8)) & 1;
    }
    return bits;
}

/// Batch results CSV. Column n_atoms_per_species holds per-species set-bit
/// counts joined with ';' in species-id order.
inline void write_results_csv(const std::string& path, const std::vector<RunResult>& results,
                              int n_sites, int n_species,
                              const std::vector<std::string>* labels = nullptr) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open results csv for writing: " + path);
    out << "seed,final_energy,wall_time_s,n_atoms_per_species,bitstring_hex";
    if (labels) out << ",label";
    out << "\n";
    out << std::setprecision(17);
    for (std::size_t r = 0; r < results.size(); ++r) {
        const auto& res = results[r];
        out << res.seed << "," << res.final_energy << "," << res.wall_time_s << ",";
        for (int s = 0; s < n_species; ++s) {
            int c = 0;
            for (int i = 0; i < n_sites; ++i)
                if (res.bits[static_cast<std::size_t>(s * n_sites + i)]) ++c;
            out << c << (s + 1 < n_species ? ";" : "");
        }
        out << "," << bits_to_hex(res.bits);
        if (labels) out << "," << (*labels)[r];
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failure on results csv: " + path);
}

inline std::vector<RunResult> read_results_csv(const std::string& path, int num_vars) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open results csv: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty results csv");
    std::vector<RunResult> out;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::istringstream ls(line);
        std::string col;
        while (std::getline(ls, col, ',')) cols.push_back(col);
        if (cols.size() < 5)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": short row");
        RunResult r;
        r.seed = std::stoull(cols[0]);
        r.final_energy = std::stod(cols[1]);
        r.wall_time_s = std::stod(cols[2]);
        r.bits = hex_to_bits(cols[4], num_vars);
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace gcsp
