# Homodyne Super-Resolution Simulator
