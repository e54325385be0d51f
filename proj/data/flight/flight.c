/* Simulated autopilot used by `tracelens demo`. */

#include <stdbool.h>

int gear = 0;
double speed = 0.0;
double takeOffSpeed = 60.0;
double altitude = -1.0;
double groundAlt = 0.0;
double safeAltForGearRetract = 100.0;

#define ACCEL_STEP 10.0
#define CLIMB_STEP 25.0
#define ROLL_STEP 5.0

void accelerate(void)
{
    speed += ACCEL_STEP;
}

void takeoff(void)
{
    if (altitude < groundAlt) {
        if (speed >= takeOffSpeed)
            altitude = groundAlt + CLIMB_STEP;
        else
            speed += ROLL_STEP;
        return;
    }
    altitude += CLIMB_STEP;
}

void retractGear(void)
{
    if (gear == 0 && altitude > safeAltForGearRetract)
        gear = 1;
}

void tick(int n)
{
    accelerate();
    takeoff();
    retractGear();
}
