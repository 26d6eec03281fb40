"""
The reflectmc library: graphs, potentials, models, reflections, samplers and exact
oracles.

"""
