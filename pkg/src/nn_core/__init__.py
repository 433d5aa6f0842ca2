"""Dense feed-forward networks, exact weight derivatives and degeneracy detection"""
