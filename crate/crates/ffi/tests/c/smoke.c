#include <stdio.h>
#include "uavfarm.h"

int main(void) {
    UavEnv *env = NULL;
    if (uavfarm_env_new("preset = \"toy\"\n", 1, 1, &env) != UAV_OK) {
        fprintf(stderr, "%s\n", uavfarm_last_error());
        return 1;
    }
    size_t n = uavfarm_env_n_uavs(env);
    int32_t actions[8] = {0};
    double rewards[8];
    bool done = false;
    while (!done) {
        for (size_t i = 0; i < n; i++) actions[i] = -1;
        if (uavfarm_env_step(env, actions, n, rewards, &done) != UAV_OK) break;
    }
    UavMetrics m;
    uavfarm_env_metrics(env, &m);
    printf("energy %.1f J\n", m.energy_j);
    uavfarm_env_free(env);
    return 0;
}
