// Umbrella header.
#ifndef HJGAME_HJGAME_HPP
#define HJGAME_HJGAME_HPP

#include "core.hpp"
#include "ode.hpp"
#include "game_model.hpp"
#include "phase_dynamics.hpp"
#include "orbit.hpp"
#include "solution.hpp"
#include "builders.hpp"
#include "nash.hpp"
#include "io.hpp"

#endif
