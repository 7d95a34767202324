"""
Download-decision algorithms: OCA, CGA, RFA and BMRL
"""
