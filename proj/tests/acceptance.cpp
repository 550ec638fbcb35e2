#include <catch2/catch_amalgamated.hpp>
#include <secmimo/experiment.hpp>
