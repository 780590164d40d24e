from src.pseudo.labels import PseudoStats, build_pseudo_gt, make_pseudo_gt, pseudo_stats
