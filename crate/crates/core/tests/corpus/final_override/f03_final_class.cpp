class Node {
public:
  virtual void visit();
};
class Leaf final : public Node {
  void visit() override final;
};
