"""
Scenario, game, learning and metric models
"""
