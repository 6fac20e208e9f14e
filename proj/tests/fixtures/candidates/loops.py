def construct_packing():
    while True:
        pass
