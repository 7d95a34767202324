"""
Numerical engine: network model, allocation, game solvers, learning and the experiment harness
"""
