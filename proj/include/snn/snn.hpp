#pragma once

#include "approx_counter.hpp"
#include "async.hpp"
#include "coins.hpp"
#include "counter.hpp"
#include "io.hpp"
#include "montecarlo.hpp"
#include "network.hpp"
#include "rand_timer.hpp"
#include "random_net.hpp"
#include "report.hpp"
#include "roles.hpp"
#include "simulate.hpp"
#include "synchronizer.hpp"
#include "timer.hpp"
