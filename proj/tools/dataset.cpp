// SPDX-License-Identifier: Apache-2.0
// psl2-dataset validate PATH | psl2-dataset convert IN OUT
#include <iostream>
#include <string>

#include "psl2/spectra_data.hpp"

int main(int argc, char** argv) {
    std::string cmd = argc > 1 ? argv[1] : "";
    try {
        if (cmd == "validate" && argc == 3) {
            auto ds = psl2::load(argv[2]);
            auto rep = psl2::validate(ds);
            psl2::write_validation(std::cout, ds, rep);
            return rep.pass() ? 0 : 1;
        }
        if (cmd == "convert" && argc == 4) {
            psl2::save(psl2::load(argv[2]), argv[3]);
            return 0;
        }
    } catch (const psl2::data_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    }
    std::cerr << "usage: psl2-dataset validate PATH\n       psl2-dataset convert IN OUT\n";
    return 2;
}
