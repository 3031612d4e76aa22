#include <stdio.h>
#include <assert.h>
#include "ds3.h"

int main(void) {
    double out = 0.0;
    assert(ds3_reg_inc_beta(0.5, 2.0, 3.0, &out) == DS3_STATUS_OK);
    assert(out > 0.68749 && out < 0.68751);
    assert(ds3_cot_success(0.9, 3, 3.0, &out) == DS3_STATUS_OK);
    assert(out > 0.7289 && out < 0.7291);

    Ds3Task *task = NULL;
    assert(ds3_task_new(2, 1, 1.0, 0.5, 25, 4.0, &task) == DS3_STATUS_OK);
    Ds3Estimate est;
    assert(ds3_simulate_cot(task, 100000, 7, &est) == DS3_STATUS_OK);
    assert(est.success_rate > 0.68 && est.success_rate < 0.70);
    ds3_task_free(task);

    Ds3BetaMixture *mix = NULL;
    assert(ds3_beta_mixture_new(1.0, 1.0, 1.0, &mix) == DS3_STATUS_OK);
    assert(ds3_bon_coverage(mix, 3, &out) == DS3_STATUS_OK);
    assert(out > 0.749 && out < 0.751);
    ds3_beta_mixture_free(mix);

    assert(ds3_lambert_w0(-1.0, &out) == DS3_STATUS_DOMAIN);
    printf("C ABI smoke test passed\n");
    return 0;
}
