#include "dqw/cli.hpp"
#include "dqw/dirac_matrices.hpp"

int main(int argc, char** argv) {
    dqw::verify_representation();
    return dqw::run_cli(argc, argv);
}
