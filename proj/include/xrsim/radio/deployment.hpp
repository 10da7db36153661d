#pragma once

#include "xrsim/core/random.hpp"
#include "xrsim/radio/channel.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace xrsim {

struct Position {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

inline double Distance3d(const Position& a, const Position& b)
{
    return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) + (a.z - b.z) * (a.z - b.z));
}

struct DeploymentConfig {
    int cells = 1;
    int columns = 6;           // sites per row; InH uses 2 rows of 6
    double interSiteM = 20.0;
    double bsHeightM = 3.0;
    double ueHeightM = 1.5;
    double carrierGhz = kCarrierGhz;
    double shadowingStdDb = kShadowingStdDb;
};

struct UeDrop {
    Position position;
    int servingCell = 0;
    /// Coupling loss to every cell: pathloss + shadowing - antenna gains.
    std::vector<double> couplingLossDb;
};

/// Cells on a rectangular grid at the inter-site distance; each cell owns
/// a square of side ISD around it. UEs are dropped uniformly over the hall
/// and attached to the minimum-loss cell; drops landing in a full cell are
/// redrawn so every cell ends up with exactly the requested count.
class Deployment {
public:
    static Deployment Drop(const DeploymentConfig& cfg, int uesPerCell, Rng& rng)
    {
        if (cfg.cells < 1 || uesPerCell < 0 || cfg.columns < 1 || cfg.interSiteM <= 0.0) {
            throw std::invalid_argument("invalid deployment configuration");
        }
        Deployment d;
        d.m_cfg = cfg;
        int cols = std::min(cfg.columns, cfg.cells);
        int rows = (cfg.cells + cols - 1) / cols;
        for (int c = 0; c < cfg.cells; ++c) {
            d.m_cells.push_back(Position{(c % cols) * cfg.interSiteM, (c / cols) * cfg.interSiteM, cfg.bsHeightM});
        }
        double half = cfg.interSiteM / 2.0;
        std::uniform_real_distribution<double> ux(-half, (cols - 1) * cfg.interSiteM + half);
        std::uniform_real_distribution<double> uy(-half, (rows - 1) * cfg.interSiteM + half);
        std::normal_distribution<double> shadow(0.0, cfg.shadowingStdDb);

        std::vector<int> count(cfg.cells, 0);
        int total = uesPerCell * cfg.cells;
        int guard = 0;
        while (static_cast<int>(d.m_ues.size()) < total) {
            if (++guard > 1000 * (total + 1)) {
                throw std::runtime_error("UE drop did not converge");
            }
            UeDrop u;
            u.position = Position{ux(rng), uy(rng), cfg.ueHeightM};
            int best = 0;
            for (int c = 0; c < cfg.cells; ++c) {
                double cl = PathlossDb(Distance3d(u.position, d.m_cells[c]), cfg.carrierGhz) + shadow(rng)
                            - kBsAntennaGainDbi - kUeAntennaGainDbi;
                u.couplingLossDb.push_back(cl);
                if (cl < u.couplingLossDb[best]) {
                    best = c;
                }
            }
            if (count[best] >= uesPerCell) {
                continue;
            }
            ++count[best];
            u.servingCell = best;
            d.m_ues.push_back(std::move(u));
        }
        return d;
    }

    const DeploymentConfig& Config() const { return m_cfg; }
    const std::vector<Position>& Cells() const { return m_cells; }
    const std::vector<UeDrop>& Ues() const { return m_ues; }

private:
    DeploymentConfig m_cfg;
    std::vector<Position> m_cells;
    std::vector<UeDrop> m_ues;
};

} // namespace xrsim
