FixtureFunctionT = None
