// Regenerates the degree-two cover fixture of s789 from the base triangulation.
#include <fstream>
#include <iostream>

#include "hnorm/covers.hpp"
#include "hnorm/manifold.hpp"

namespace {

// Systole of the two-cusped double cover, computed externally with SnapPy.
constexpr double kCoverSystole = 0.69314718055994;

}  // namespace

int main(int argc, char** argv) {
    if (argc != 3) {
        std::cerr << "usage: make_fixtures <s789.mfd> <output.mfd>\n";
        return 2;
    }
    try {
        const hnorm::TriangulatedManifold base = hnorm::parse_manifold(argv[1]);
        hnorm::TriangulatedManifold cover = hnorm::find_double_cover(base, 2, base.name + "_cover");
        cover.systole = kCoverSystole;
        cover.cover_of->matrix = hnorm::pullback_correspondence(base, cover);
        // The pullback of the base generator is -2 times the cover generator and the Thurston norm
        // doubles under a degree-two cover, so the cover generator has norm 2.
        cover.thurston_ball = {{2.0}, {-2.0}};
        cover.class_norms = {{{1}, 2.0}};
        std::ofstream os(argv[2]);
        os << "# Two-sheeted cover of s789 with two cusps, generated by make_fixtures.\n"
           << hnorm::serialize_manifold(cover);
        if (!os) throw std::runtime_error(std::string("cannot write ") + argv[2]);
    } catch (const std::exception& e) {
        std::cerr << "make_fixtures: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
