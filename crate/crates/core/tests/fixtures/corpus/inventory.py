class Inventory:
    """Inventory model."""

    def m0(self, x):
        y = x * 1
        return y + self.offset

    def m1(self, x):
        y = x * 2
        return y + self.offset

    def m2(self, x):
        y = x * 3
        return y + self.offset

    def m3(self, x):
        y = x * 4
        return y + self.offset

    def m4(self, x):
        y = x * 5
        return y + self.offset

    def m5(self, x):
        y = x * 6
        return y + self.offset

    def m6(self, x):
        y = x * 7
        return y + self.offset

    def m7(self, x):
        y = x * 8
        return y + self.offset


class Small:
    pass
