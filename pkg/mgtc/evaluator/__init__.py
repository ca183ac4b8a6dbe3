"""
Behavior similarity of process models, k-fold validation and significance \
        testing.
"""
